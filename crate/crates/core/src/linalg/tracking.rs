//! Branch continuity for eigenpairs along a sampled path.
//!
//! Sorting by eigenvalue alone swaps branches whenever two eigenvalues cross.
//! Instead each new decomposition is relabeled by the assignment that
//! maximizes Σ_j |⟨prev_j|next_j⟩|² over matched branches.

use super::eigen::SpectralDecomposition;
use super::matrix::{check_dims, inner};
use super::LinalgError;

/// Eigenvalues closer than this (relative to the spectral scale) are treated
/// as one degenerate cluster when scoring a match.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// |⟨prev branch a | next pair b⟩|², rows by prev label, columns by next position.
pub fn overlap_table(prev: &SpectralDecomposition, next: &SpectralDecomposition) -> Vec<Vec<f64>> {
    let prev_vecs = prev.vectors_by_branch();
    prev_vecs
        .iter()
        .map(|pv| {
            next.vectors()
                .iter()
                .map(|nv| inner(pv, nv).norm_sqr())
                .collect()
        })
        .collect()
}

/// Relabels `next` so each branch continues the best-overlapping branch of `prev`.
pub fn track_eigenpairs(
    prev: &SpectralDecomposition,
    next: &SpectralDecomposition,
) -> Result<SpectralDecomposition, LinalgError> {
    check_dims(prev.dim(), next.dim())?;
    let table = overlap_table(prev, next);
    let assignment = max_weight_assignment(&table);
    let mut labels = vec![0; next.dim()];
    for (label, &pos) in assignment.iter().enumerate() {
        labels[pos] = label;
    }
    next.relabeled(labels)
}

/// For each branch label, the weight of the previous branch vector inside the
/// degenerate cluster of the branch it was matched to. A value near 1 means an
/// unambiguous continuation; below ½ the step is too coarse to tell branches apart.
pub fn matched_overlaps(
    prev: &SpectralDecomposition,
    tracked: &SpectralDecomposition,
) -> Result<Vec<f64>, LinalgError> {
    check_dims(prev.dim(), tracked.dim())?;
    let table = overlap_table(prev, tracked);
    let scale = tracked
        .values()
        .iter()
        .fold(1.0f64, |acc, v| acc.max(v.abs()));
    let tol = DEGENERACY_TOL * scale;
    Ok((0..prev.dim())
        .map(|label| {
            let value = tracked.branch_value(label);
            tracked
                .values()
                .iter()
                .enumerate()
                .filter(|(_, v)| (*v - value).abs() <= tol)
                .map(|(pos, _)| table[label][pos])
                .sum()
        })
        .collect())
}

/// Exact maximum-weight perfect matching on a square table (Hungarian method
/// with potentials). Returns `assignment[row] = column`.
pub fn max_weight_assignment(weights: &[Vec<f64>]) -> Vec<usize> {
    let n = weights.len();
    if n == 0 {
        return Vec::new();
    }
    // minimize cost = −weight; 1-based arrays with a sentinel column 0
    let cost = |i: usize, j: usize| -weights[i - 1][j - 1];
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[p[j] - 1] = j - 1;
    }
    assignment
}
