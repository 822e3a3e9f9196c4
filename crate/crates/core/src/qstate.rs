//! States, Hamiltonians and the scalar functionals built on them.
//!
//! Natural units throughout: ħ = k_B = 1, natural logarithms.

use thiserror::Error;

use crate::linalg::{
    hermitian_eig, inner, trace_product, CMatrix, LinalgError, SpectralDecomposition,
};

pub const STATE_HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues down to −this are roundoff and read as zero.
pub const PSD_TOL: f64 = 1e-10;
pub const STOCHASTIC_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("matrix is not Hermitian (max |A - A†| = {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("density matrix trace is {trace}, expected 1")]
    TraceNotUnity { trace: f64 },
    #[error("density matrix has eigenvalue {min_eigenvalue:e} below zero")]
    NotPositive { min_eigenvalue: f64 },
    #[error("temperature must be positive and finite, got {0}")]
    NonPositiveTemperature(f64),
    #[error("overlap matrix is not doubly stochastic (defect {defect:e})")]
    NotStochastic { defect: f64 },
}

/// Hermitian energy operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian(CMatrix);

impl Hamiltonian {
    pub fn new(matrix: CMatrix) -> Result<Self, StateError> {
        let defect = matrix.hermiticity_defect();
        if defect > STATE_HERMITICITY_TOL * matrix.frobenius_norm().max(1.0) {
            return Err(StateError::NotHermitian { defect });
        }
        Ok(Self(matrix.hermitian_part()))
    }

    /// Σ_n E_n |n⟩⟨n| in the computational basis.
    pub fn diagonal(levels: &[f64]) -> Result<Self, StateError> {
        Ok(Self(CMatrix::from_real_diagonal(levels)?))
    }

    /// Two-level Hamiltonian with basis order (g, e).
    pub fn two_level(e_g: f64, e_e: f64) -> Result<Self, StateError> {
        Self::diagonal(&[e_g, e_e])
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn eig(&self) -> Result<SpectralDecomposition, StateError> {
        Ok(hermitian_eig(&self.0)?)
    }
}

/// Unit-trace positive semidefinite Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self, StateError> {
        let defect = matrix.hermiticity_defect();
        if defect > STATE_HERMITICITY_TOL {
            return Err(StateError::NotHermitian { defect });
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(StateError::TraceNotUnity { trace });
        }
        let matrix = matrix.hermitian_part();
        let min_eigenvalue = hermitian_eig(&matrix)?.values()[0];
        if min_eigenvalue < -PSD_TOL {
            return Err(StateError::NotPositive { min_eigenvalue });
        }
        Ok(Self(matrix))
    }

    /// |ψ⟩⟨ψ| for a (not necessarily normalized) state vector.
    pub fn pure(psi: &[crate::linalg::Complex64]) -> Result<Self, StateError> {
        let norm_sqr = inner(psi, psi).re;
        Self::new(CMatrix::weighted_projector(psi, 1.0 / norm_sqr))
    }

    /// Diagonal state with the given populations.
    pub fn diagonal(populations: &[f64]) -> Result<Self, StateError> {
        Self::new(CMatrix::from_real_diagonal(populations)?)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(CMatrix::identity(dim).scale(1.0 / dim as f64))
    }

    /// ½(|g⟩ + |e⟩)(⟨g| + ⟨e|).
    pub fn plus_state() -> Self {
        Self(CMatrix::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).expect("finite entries"))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn eig(&self) -> Result<SpectralDecomposition, StateError> {
        Ok(hermitian_eig(&self.0)?)
    }

    pub fn purity(&self) -> f64 {
        trace_product(&self.0, &self.0).expect("same matrix").re
    }
}

/// Bath temperature (k_B = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalParams {
    temperature: f64,
}

impl ThermalParams {
    pub fn new(temperature: f64) -> Result<Self, StateError> {
        if !temperature.is_finite() || temperature <= 0.0 {
            return Err(StateError::NonPositiveTemperature(temperature));
        }
        Ok(Self { temperature })
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.temperature
    }
}

/// Boltzmann weights e^{−βE_n}/Z per eigenpair, shifted by the ground energy so
/// that extreme β neither overflows nor underflows to 0/0.
fn boltzmann_weights(levels: &[f64], beta: f64) -> (Vec<f64>, f64) {
    let ground = levels.iter().copied().fold(f64::INFINITY, f64::min);
    let raw: Vec<f64> = levels
        .iter()
        .map(|&e| (-beta * (e - ground)).exp())
        .collect();
    let z_shifted: f64 = raw.iter().sum();
    (raw.iter().map(|w| w / z_shifted).collect(), z_shifted)
}

pub fn gibbs_state(h: &Hamiltonian, th: ThermalParams) -> Result<DensityMatrix, StateError> {
    let spectrum = h.eig()?;
    let (weights, _) = boltzmann_weights(spectrum.values(), th.beta());
    let mut rho = CMatrix::zeros(h.dim());
    for (v, &w) in spectrum.vectors().iter().zip(&weights) {
        rho = &rho + &CMatrix::weighted_projector(v, w);
    }
    DensityMatrix::new(rho)
}

/// Partition function Z = Σ_n e^{−βE_n}.
pub fn partition_function(h: &Hamiltonian, th: ThermalParams) -> Result<f64, StateError> {
    let spectrum = h.eig()?;
    Ok(spectrum
        .values()
        .iter()
        .map(|&e| (-th.beta() * e).exp())
        .sum())
}

/// F = −T ln Z.
pub fn free_energy(h: &Hamiltonian, th: ThermalParams) -> Result<f64, StateError> {
    let spectrum = h.eig()?;
    let levels = spectrum.values();
    let ground = levels.iter().copied().fold(f64::INFINITY, f64::min);
    let (_, z_shifted) = boltzmann_weights(levels, th.beta());
    Ok(ground - th.temperature() * z_shifted.ln())
}

/// −Σ_k p ln p over the eigenvalues of ρ, with 0·ln 0 = 0.
pub fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values
        .iter()
        .map(|&p| p.clamp(0.0, 1.0))
        .filter(|&p| p > 0.0)
        .fold(0.0, |s, p| s - p * p.ln())
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64, StateError> {
    Ok(entropy_of_spectrum(rho.eig()?.values()))
}

/// U = Re tr(ρH).
pub fn internal_energy(rho: &DensityMatrix, h: &Hamiltonian) -> Result<f64, StateError> {
    Ok(trace_product(rho.matrix(), h.matrix())?.re)
}

/// w[n][k] = |⟨n|k⟩|², rows by energy-branch label, columns by state-branch label.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix {
    w: Vec<Vec<f64>>,
}

impl OverlapMatrix {
    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn get(&self, n: usize, k: usize) -> f64 {
        self.w[n][k]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.w
    }

    /// Largest deviation of any row or column sum from 1.
    pub fn stochastic_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            let row: f64 = self.w[i].iter().sum();
            let col: f64 = (0..n).map(|r| self.w[r][i]).sum();
            worst = worst.max((row - 1.0).abs()).max((col - 1.0).abs());
        }
        worst
    }
}

pub fn overlap_matrix(
    energy_basis: &SpectralDecomposition,
    state_basis: &SpectralDecomposition,
) -> Result<OverlapMatrix, StateError> {
    if energy_basis.dim() != state_basis.dim() {
        return Err(LinalgError::DimMismatch {
            expected: energy_basis.dim(),
            found: state_basis.dim(),
        }
        .into());
    }
    let ns = energy_basis.vectors_by_branch();
    let ks = state_basis.vectors_by_branch();
    let w: Vec<Vec<f64>> = ns
        .iter()
        .map(|n| ks.iter().map(|k| inner(n, k).norm_sqr().min(1.0)).collect())
        .collect();
    let out = OverlapMatrix { w };
    let defect = out.stochastic_defect();
    if defect > STOCHASTIC_TOL {
        return Err(StateError::NotStochastic { defect });
    }
    Ok(out)
}

/// Σ_{i≠j} |⟨b_i|ρ|b_j⟩|.
pub fn l1_coherence(rho: &DensityMatrix, basis: &SpectralDecomposition) -> Result<f64, StateError> {
    if rho.dim() != basis.dim() {
        return Err(LinalgError::DimMismatch {
            expected: rho.dim(),
            found: basis.dim(),
        }
        .into());
    }
    let b = basis.vectors();
    let mut acc = 0.0;
    for i in 0..b.len() {
        for j in 0..b.len() {
            if i != j {
                acc += rho.matrix().sandwich(&b[i], &b[j]).norm();
            }
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Complex64;
    use std::f64::consts::LN_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn density_matrix_invariants() {
        let m = CMatrix::from_real_rows(&[vec![0.9, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(
            DensityMatrix::new(m),
            Err(StateError::TraceNotUnity { .. })
        ));
        let m = CMatrix::from_real_rows(&[vec![1.2, 0.0], vec![0.0, -0.2]]).unwrap();
        assert!(matches!(
            DensityMatrix::new(m),
            Err(StateError::NotPositive { .. })
        ));
        let m = CMatrix::from_real_rows(&[vec![0.5, 0.1], vec![0.0, 0.5]]).unwrap();
        assert!(matches!(
            DensityMatrix::new(m),
            Err(StateError::NotHermitian { .. })
        ));
        // roundoff-negative eigenvalue accepted
        let m = CMatrix::from_real_diagonal(&[1.0 + 1e-11, -1e-11]).unwrap();
        assert!(DensityMatrix::new(m).is_ok());
    }

    #[test]
    fn gibbs_limits() {
        let eps = 1.3;
        let h = Hamiltonian::two_level(0.0, eps).unwrap();

        let hot = gibbs_state(&h, ThermalParams::new(1e12).unwrap()).unwrap();
        assert!(
            hot.matrix()
                .distance(&CMatrix::identity(2).scale(0.5))
                .unwrap()
                < 1e-12
        );

        // βε = ln 2
        let th = ThermalParams::new(eps / LN_2).unwrap();
        let rho = gibbs_state(&h, th).unwrap();
        assert!(close(rho.matrix().get(0, 0).re, 2.0 / 3.0, 1e-15));
        assert!(close(rho.matrix().get(1, 1).re, 1.0 / 3.0, 1e-15));
        assert!(close(partition_function(&h, th).unwrap(), 1.5, 1e-15));

        let cold = gibbs_state(&h, ThermalParams::new(1e-4).unwrap()).unwrap();
        assert_eq!(cold.matrix().get(0, 0).re, 1.0);
        assert_eq!(cold.matrix().get(1, 1).re, 0.0);
    }

    #[test]
    fn gibbs_commutes_with_hamiltonian() {
        let h = Hamiltonian::new(
            CMatrix::from_rows(&[
                vec![Complex64::new(0.3, 0.0), Complex64::new(0.2, -0.5)],
                vec![Complex64::new(0.2, 0.5), Complex64::new(-1.0, 0.0)],
            ])
            .unwrap(),
        )
        .unwrap();
        let rho = gibbs_state(&h, ThermalParams::new(0.7).unwrap()).unwrap();
        let comm = &(rho.matrix() * h.matrix()) - &(h.matrix() * rho.matrix());
        assert!(comm.frobenius_norm() < 1e-12);
    }

    #[test]
    fn free_energy_examples() {
        let eps = 0.8;
        let h = Hamiltonian::two_level(0.0, eps).unwrap();
        let t = eps / LN_2;
        let f = free_energy(&h, ThermalParams::new(t).unwrap()).unwrap();
        assert!(close(f, -t * 1.5f64.ln(), 1e-14));

        let single = Hamiltonian::diagonal(&[2.5]).unwrap();
        assert!(close(
            free_energy(&single, ThermalParams::new(3.0).unwrap()).unwrap(),
            2.5,
            1e-15
        ));

        let cold = free_energy(&h, ThermalParams::new(1e-6).unwrap()).unwrap();
        assert!(cold.abs() < 1e-12);

        assert!(matches!(
            ThermalParams::new(0.0),
            Err(StateError::NonPositiveTemperature(_))
        ));
        assert!(ThermalParams::new(-1.0).is_err());
    }

    #[test]
    fn entropy_examples() {
        let g = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        assert_eq!(von_neumann_entropy(&g).unwrap(), 0.0);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!(close(von_neumann_entropy(&mixed).unwrap(), LN_2, 1e-15));

        let e1 = (-1.0f64).exp();
        let rho = DensityMatrix::new(
            CMatrix::from_real_rows(&[
                vec![(2.0 - e1) / 2.0, (-0.5f64).exp() / 2.0],
                vec![(-0.5f64).exp() / 2.0, e1 / 2.0],
            ])
            .unwrap(),
        )
        .unwrap();
        // −Σ p ln p with p from the characteristic polynomial
        let disc = (1.0 - e1 + e1 * e1).sqrt();
        let (p0, p1) = ((1.0 + disc) / 2.0, (1.0 - disc) / 2.0);
        let expected = -p0 * p0.ln() - p1 * p1.ln();
        assert!(close(von_neumann_entropy(&rho).unwrap(), expected, 1e-13));
        assert!(close(expected, 0.232_373_591, 1e-8));
    }

    #[test]
    fn internal_energy_examples() {
        let (eg, ee) = (-0.25, 1.5);
        let h = Hamiltonian::two_level(eg, ee).unwrap();
        let e = DensityMatrix::diagonal(&[0.0, 1.0]).unwrap();
        assert!(close(internal_energy(&e, &h).unwrap(), ee, 1e-15));

        let plus = DensityMatrix::plus_state();
        let h01 = Hamiltonian::two_level(0.0, 1.0).unwrap();
        assert!(close(internal_energy(&plus, &h01).unwrap(), 0.5, 1e-15));

        let eps = 2.0;
        let h = Hamiltonian::two_level(0.0, eps).unwrap();
        let rho = gibbs_state(&h, ThermalParams::new(eps / LN_2).unwrap()).unwrap();
        assert!(close(internal_energy(&rho, &h).unwrap(), eps / 3.0, 1e-14));
    }

    #[test]
    fn overlap_examples() {
        let h = Hamiltonian::two_level(0.0, 1.0).unwrap().eig().unwrap();
        let w = overlap_matrix(&h, &h).unwrap();
        assert_eq!(w.rows(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);

        let rotated =
            DensityMatrix::new(CMatrix::from_real_rows(&[vec![0.8, 0.0], vec![0.0, 0.2]]).unwrap())
                .unwrap();
        // 45° rotation of the basis
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r = CMatrix::from_real_rows(&[vec![s, -s], vec![s, s]]).unwrap();
        let m = &(&r * rotated.matrix()) * &r.adjoint();
        let basis = crate::linalg::hermitian_eig(&m).unwrap();
        let w = overlap_matrix(&h, &basis).unwrap();
        for row in w.rows() {
            for &x in row {
                assert!(close(x, 0.5, 1e-15));
            }
        }
    }

    #[test]
    fn l1_examples() {
        let h = Hamiltonian::two_level(0.0, 1.0).unwrap().eig().unwrap();
        let diag = DensityMatrix::diagonal(&[0.3, 0.7]).unwrap();
        assert_eq!(l1_coherence(&diag, &diag.eig().unwrap()).unwrap(), 0.0);
        assert!(close(
            l1_coherence(&DensityMatrix::plus_state(), &h).unwrap(),
            1.0,
            1e-15
        ));
        let gamma_t = 0.7f64;
        let a = (-gamma_t).exp();
        let rho = DensityMatrix::new(
            CMatrix::from_real_rows(&[
                vec![(2.0 - a) / 2.0, (-gamma_t / 2.0).exp() / 2.0],
                vec![(-gamma_t / 2.0).exp() / 2.0, a / 2.0],
            ])
            .unwrap(),
        )
        .unwrap();
        assert!(close(
            l1_coherence(&rho, &h).unwrap(),
            (-gamma_t / 2.0).exp(),
            1e-15
        ));
    }
}
