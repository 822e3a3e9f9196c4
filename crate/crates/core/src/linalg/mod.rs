//! Dense complex linear algebra for small Hermitian problems.

mod eigen;
mod matrix;
mod tracking;

use thiserror::Error;

pub use eigen::{
    hermitian_eig, SpectralDecomposition, HERMITICITY_TOL, MAX_SWEEPS, OFF_DIAGONAL_TOL,
};
pub use matrix::{inner, trace_product, CMatrix};
pub use num_complex::Complex64;
pub use tracking::{
    matched_overlaps, max_weight_assignment, overlap_table, track_eigenpairs, DEGENERACY_TOL,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix dimension must be at least 1")]
    Empty,
    #[error("{len} entries cannot form a {dim}x{dim} matrix")]
    Shape { dim: usize, len: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("matrix is not Hermitian (max |A - A†| = {defect:e})")]
    NotHermitian { defect: f64 },
    #[error(
        "Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})"
    )]
    NoConvergence { sweeps: usize, residual: f64 },
    #[error("branch labels are not a permutation")]
    InvalidLabels,
}
