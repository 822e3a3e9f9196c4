use num_complex::Complex64;

use super::matrix::{inner, CMatrix};
use super::LinalgError;

/// Relative hermiticity tolerance accepted by [`hermitian_eig`].
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Sweeps stop once the off-diagonal Frobenius mass falls below this fraction of ‖A‖_F.
pub const OFF_DIAGONAL_TOL: f64 = 1e-14;
pub const MAX_SWEEPS: usize = 50;

/// Eigenvalues with paired unit eigenvectors and a stable branch label per pair.
///
/// Pairs are stored in ascending eigenvalue order. `labels[i]` is the branch
/// identity of pair `i`; a fresh decomposition has the identity labeling and
/// [`track_eigenpairs`](super::track_eigenpairs) permutes labels so that a
/// branch keeps its label along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    values: Vec<f64>,
    vectors: Vec<Vec<Complex64>>,
    labels: Vec<usize>,
}

impl SpectralDecomposition {
    /// Assembles a decomposition from explicit pairs. `labels` must be a
    /// permutation of `0..values.len()`; vectors are used as given.
    pub fn from_parts(
        values: Vec<f64>,
        vectors: Vec<Vec<Complex64>>,
        labels: Vec<usize>,
    ) -> Result<Self, LinalgError> {
        let dim = values.len();
        if dim == 0 {
            return Err(LinalgError::Empty);
        }
        if vectors.len() != dim || vectors.iter().any(|v| v.len() != dim) {
            return Err(LinalgError::Shape {
                dim,
                len: vectors.iter().map(Vec::len).sum(),
            });
        }
        if !is_permutation(&labels, dim) {
            return Err(LinalgError::InvalidLabels);
        }
        Ok(Self {
            values,
            vectors,
            labels,
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Storage position of the pair carrying `label`.
    pub fn position_of(&self, label: usize) -> usize {
        self.labels
            .iter()
            .position(|&l| l == label)
            .expect("label out of range")
    }

    pub fn branch_value(&self, label: usize) -> f64 {
        self.values[self.position_of(label)]
    }

    pub fn branch_vector(&self, label: usize) -> &[Complex64] {
        &self.vectors[self.position_of(label)]
    }

    /// Eigenvalues indexed by branch label.
    pub fn values_by_branch(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (pos, &label) in self.labels.iter().enumerate() {
            out[label] = self.values[pos];
        }
        out
    }

    /// Eigenvectors indexed by branch label.
    pub fn vectors_by_branch(&self) -> Vec<&[Complex64]> {
        let mut out: Vec<&[Complex64]> = vec![&[]; self.dim()];
        for (pos, &label) in self.labels.iter().enumerate() {
            out[label] = &self.vectors[pos];
        }
        out
    }

    /// Returns a copy with branch labels replaced; values and vectors stay paired.
    pub fn relabeled(&self, labels: Vec<usize>) -> Result<Self, LinalgError> {
        Self::from_parts(self.values.clone(), self.vectors.clone(), labels)
    }

    /// Returns a copy with eigenvector `i` multiplied by `exp(i·phases[i])`.
    pub fn with_phases(&self, phases: &[f64]) -> Self {
        let mut out = self.clone();
        for (v, &phi) in out.vectors.iter_mut().zip(phases) {
            let u = Complex64::from_polar(1.0, phi);
            for z in v.iter_mut() {
                *z *= u;
            }
        }
        out
    }

    /// max |⟨v_i|v_j⟩ − δ_ij|.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let target = if i == j { 1.0 } else { 0.0 };
                let d = (inner(&self.vectors[i], &self.vectors[j]) - target).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Σ_j values[j]·|v_j⟩⟨v_j|.
    pub fn reconstruct(&self) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim());
        for (v, &lambda) in self.vectors.iter().zip(&self.values) {
            acc = &acc + &CMatrix::weighted_projector(v, lambda);
        }
        acc
    }

    /// ‖A − Σ_j values[j]·|v_j⟩⟨v_j|‖_F.
    pub fn reconstruction_defect(&self, source: &CMatrix) -> Result<f64, LinalgError> {
        self.reconstruct().distance(source)
    }
}

fn is_permutation(labels: &[usize], dim: usize) -> bool {
    if labels.len() != dim {
        return false;
    }
    let mut seen = vec![false; dim];
    for &l in labels {
        if l >= dim || seen[l] {
            return false;
        }
        seen[l] = true;
    }
    true
}

fn off_diagonal_norm(m: &CMatrix) -> f64 {
    let n = m.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m.get(i, j).norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary, then applies the real symmetric Jacobi rotation. Eigenvalues are
/// returned ascending with the identity labeling.
pub fn hermitian_eig(a: &CMatrix) -> Result<SpectralDecomposition, LinalgError> {
    let n = a.dim();
    let norm = a.frobenius_norm();
    let defect = a.hermiticity_defect();
    if defect > HERMITICITY_TOL * norm {
        return Err(LinalgError::NotHermitian { defect });
    }

    let mut m = a.hermitian_part();
    let mut v = CMatrix::identity(n);
    let tol = OFF_DIAGONAL_TOL * norm;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&m) <= tol {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }
    if !converged {
        let residual = off_diagonal_norm(&m);
        if residual > tol {
            return Err(LinalgError::NoConvergence {
                sweeps: MAX_SWEEPS,
                residual,
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(i, i).re.total_cmp(&m.get(j, j).re));
    let values = order.iter().map(|&i| m.get(i, i).re).collect();
    let vectors = order.iter().map(|&i| v.column(i)).collect();
    Ok(SpectralDecomposition {
        values,
        vectors,
        labels: (0..n).collect(),
    })
}

fn rotate(m: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let b = m.get(p, q);
    let mag = b.norm();
    if mag == 0.0 {
        return;
    }
    let phase = b / mag;
    let app = m.get(p, p).re;
    let aqq = m.get(q, q).re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // U = diag(1, e^{-iφ})·[[c, s], [-s, c]]
    let u_pp = Complex64::new(c, 0.0);
    let u_pq = Complex64::new(s, 0.0);
    let u_qp = -phase.conj() * s;
    let u_qq = phase.conj() * c;

    let n = m.dim();
    for k in 0..n {
        let akp = m.get(k, p);
        let akq = m.get(k, q);
        m.set(k, p, akp * u_pp + akq * u_qp);
        m.set(k, q, akp * u_pq + akq * u_qq);
    }
    for k in 0..n {
        let apk = m.get(p, k);
        let aqk = m.get(q, k);
        m.set(p, k, u_pp.conj() * apk + u_qp.conj() * aqk);
        m.set(q, k, u_pq.conj() * apk + u_qq.conj() * aqk);
    }
    m.set(p, q, Complex64::new(0.0, 0.0));
    m.set(q, p, Complex64::new(0.0, 0.0));
    m.set(p, p, Complex64::new(app - t * mag, 0.0));
    m.set(q, q, Complex64::new(aqq + t * mag, 0.0));

    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, vkp * u_pp + vkq * u_qp);
        v.set(k, q, vkp * u_pq + vkq * u_qq);
    }
}
