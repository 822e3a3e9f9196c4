//! Discrete and closed-form time evolution of two-level states.
//!
//! Basis convention everywhere: index 0 = |g⟩, index 1 = |e⟩.

use thiserror::Error;

use crate::linalg::{CMatrix, Complex64, LinalgError};
use crate::qstate::{DensityMatrix, StateError};

pub const COMPLETENESS_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("decay rate must be non-negative and finite, got {0}")]
    InvalidRate(f64),
    #[error("Kraus operators violate completeness (‖Σ K†K − I‖ = {defect:e})")]
    Incomplete { defect: f64 },
    #[error("a Kraus channel needs at least one operator")]
    NoOperators,
    #[error("iteration needs at least one step")]
    ZeroSteps,
    #[error("expected a {expected}-level state, got {found}")]
    DimMismatch { expected: usize, found: usize },
}

/// Completely positive trace-preserving map ρ → Σ_i K_i ρ K_i†.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    operators: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(operators: Vec<CMatrix>) -> Result<Self, ChannelError> {
        let first = operators.first().ok_or(ChannelError::NoOperators)?;
        let dim = first.dim();
        let mut sum = CMatrix::zeros(dim);
        for k in &operators {
            if k.dim() != dim {
                return Err(ChannelError::DimMismatch {
                    expected: dim,
                    found: k.dim(),
                });
            }
            sum = &sum + &(&k.adjoint() * k);
        }
        let defect = sum.distance(&CMatrix::identity(dim))?;
        if defect > COMPLETENESS_TOL {
            return Err(ChannelError::Incomplete { defect });
        }
        Ok(Self { operators })
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.operators[0].dim()
    }

    /// ‖Σ K†K − I‖_F.
    pub fn completeness_defect(&self) -> f64 {
        let mut sum = CMatrix::zeros(self.dim());
        for k in &self.operators {
            sum = &sum + &(&k.adjoint() * k);
        }
        (&sum - &CMatrix::identity(self.dim())).frobenius_norm()
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix, ChannelError> {
        apply_channel(self, rho)
    }
}

/// Decay rate Γ of the excited level (probability per unit time).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayParams {
    gamma: f64,
}

impl DecayParams {
    pub fn new(gamma: f64) -> Result<Self, ChannelError> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(ChannelError::InvalidRate(gamma));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Decay probability p = Γ·Δt for one step of length `dt`.
    pub fn step_probability(&self, dt: f64) -> Result<f64, ChannelError> {
        check_probability(self.gamma * dt)
    }
}

fn check_probability(p: f64) -> Result<f64, ChannelError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ChannelError::ProbabilityOutOfRange(p));
    }
    Ok(p)
}

fn check_time(t: f64) -> Result<f64, ChannelError> {
    if !t.is_finite() || t < 0.0 {
        return Err(ChannelError::NegativeTime(t));
    }
    Ok(t)
}

fn check_two_level(rho: &DensityMatrix) -> Result<(), ChannelError> {
    if rho.dim() != 2 {
        return Err(ChannelError::DimMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    Ok(())
}

/// K₀ = |g⟩⟨g| + √(1−p)|e⟩⟨e|, K₁ = √p|g⟩⟨e|.
pub fn amplitude_damping_kraus(p: f64) -> Result<KrausChannel, ChannelError> {
    let p = check_probability(p)?;
    let k0 = CMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, (1.0 - p).sqrt()]])?;
    let k1 = CMatrix::from_real_rows(&[vec![0.0, p.sqrt()], vec![0.0, 0.0]])?;
    KrausChannel::new(vec![k0, k1])
}

pub fn apply_channel(
    ch: &KrausChannel,
    rho: &DensityMatrix,
) -> Result<DensityMatrix, ChannelError> {
    if ch.dim() != rho.dim() {
        return Err(ChannelError::DimMismatch {
            expected: ch.dim(),
            found: rho.dim(),
        });
    }
    let mut out = CMatrix::zeros(rho.dim());
    for k in ch.operators() {
        out = &out + &(&(k * rho.matrix()) * &k.adjoint());
    }
    Ok(DensityMatrix::new(out.hermitian_part())?)
}

/// Amplitude damping in the continuous-time limit:
/// ρ₀₀ + (1−e^{−Γt})ρ₁₁, e^{−Γt/2}ρ₀₁, e^{−Γt}ρ₁₁.
pub fn ad_closed_form(
    rho0: &DensityMatrix,
    dp: DecayParams,
    t: f64,
) -> Result<DensityMatrix, ChannelError> {
    let t = check_time(t)?;
    check_two_level(rho0)?;
    let m = rho0.matrix();
    let survive = (-dp.gamma() * t).exp();
    let coherence = (-dp.gamma() * t / 2.0).exp();
    let r00 = m.get(0, 0) + m.get(1, 1) * (1.0 - survive);
    let r01 = m.get(0, 1) * coherence;
    let r11 = m.get(1, 1) * survive;
    let out = CMatrix::from_rows(&[vec![r00, r01], vec![r01.conj(), r11]])?;
    Ok(DensityMatrix::new(out)?)
}

/// Applies amplitude damping with p = Γt/n, n times.
pub fn iterate_channel(
    rho0: &DensityMatrix,
    dp: DecayParams,
    t: f64,
    n: usize,
) -> Result<DensityMatrix, ChannelError> {
    let t = check_time(t)?;
    if n == 0 {
        return Err(ChannelError::ZeroSteps);
    }
    check_two_level(rho0)?;
    let ch = amplitude_damping_kraus(dp.gamma() * t / n as f64)?;
    let mut rho = rho0.clone();
    for _ in 0..n {
        rho = apply_channel(&ch, &rho)?;
    }
    Ok(rho)
}

/// Resonant Rabi state cos(Ω_R t/2)|g⟩ + i sin(Ω_R t/2)|e⟩ as a density matrix.
pub fn rabi_state(omega: f64, t: f64) -> Result<DensityMatrix, ChannelError> {
    let t = check_time(t)?;
    let half = omega * t / 2.0;
    let (c, s) = (half.cos(), half.sin());
    let coh = Complex64::new(0.0, -(omega * t).sin() / 2.0);
    let m = CMatrix::from_rows(&[
        vec![Complex64::new(c * c, 0.0), coh],
        vec![coh.conj(), Complex64::new(s * s, 0.0)],
    ])?;
    Ok(DensityMatrix::new(m)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn excited() -> DensityMatrix {
        DensityMatrix::diagonal(&[0.0, 1.0]).unwrap()
    }

    fn assert_close(a: &CMatrix, b: &CMatrix, tol: f64) {
        let d = a.distance(b).unwrap();
        assert!(d <= tol, "distance {d:e} > {tol:e}\n{a:?}\n{b:?}");
    }

    #[test]
    fn kraus_extremes() {
        let id = amplitude_damping_kraus(0.0).unwrap();
        assert_eq!(id.operators()[0], CMatrix::identity(2));
        assert_eq!(id.operators()[1], CMatrix::zeros(2));

        let full = amplitude_damping_kraus(1.0).unwrap();
        for rho in [
            excited(),
            DensityMatrix::plus_state(),
            DensityMatrix::maximally_mixed(2),
        ] {
            let out = full.apply(&rho).unwrap();
            assert_close(
                out.matrix(),
                &CMatrix::from_real_diagonal(&[1.0, 0.0]).unwrap(),
                1e-15,
            );
        }
        assert!(matches!(
            amplitude_damping_kraus(1.5),
            Err(ChannelError::ProbabilityOutOfRange(_))
        ));
        assert!(amplitude_damping_kraus(-0.1).is_err());
    }

    #[test]
    fn kraus_completeness() {
        for i in 0..=20 {
            let ch = amplitude_damping_kraus(i as f64 / 20.0).unwrap();
            assert!(ch.completeness_defect() < 1e-15);
        }
        let bad = CMatrix::identity(2).scale(0.9);
        assert!(matches!(
            KrausChannel::new(vec![bad]),
            Err(ChannelError::Incomplete { .. })
        ));
    }

    #[test]
    fn apply_examples() {
        let ch = amplitude_damping_kraus(0.25).unwrap();
        let out = ch.apply(&excited()).unwrap();
        assert_close(
            out.matrix(),
            &CMatrix::from_real_diagonal(&[0.25, 0.75]).unwrap(),
            1e-15,
        );

        let ch = amplitude_damping_kraus(0.75).unwrap();
        let out = ch.apply(&DensityMatrix::plus_state()).unwrap();
        let want = CMatrix::from_real_rows(&[vec![0.875, 0.25], vec![0.25, 0.125]]).unwrap();
        assert_close(out.matrix(), &want, 1e-15);

        let plus = DensityMatrix::plus_state();
        let out = amplitude_damping_kraus(0.0).unwrap().apply(&plus).unwrap();
        assert_eq!(out, plus);

        let three = DensityMatrix::maximally_mixed(3);
        assert!(matches!(
            ch.apply(&three),
            Err(ChannelError::DimMismatch { .. })
        ));
    }

    #[test]
    fn apply_matches_explicit_map() {
        let rho = DensityMatrix::new(
            CMatrix::from_rows(&[
                vec![Complex64::new(0.4, 0.0), Complex64::new(0.1, 0.3)],
                vec![Complex64::new(0.1, -0.3), Complex64::new(0.6, 0.0)],
            ])
            .unwrap(),
        )
        .unwrap();
        let p = 0.37;
        let out = amplitude_damping_kraus(p).unwrap().apply(&rho).unwrap();
        let m = rho.matrix();
        let q = (1.0 - p).sqrt();
        let want = CMatrix::from_rows(&[
            vec![m.get(0, 0) + m.get(1, 1) * p, m.get(0, 1) * q],
            vec![m.get(1, 0) * q, m.get(1, 1) * (1.0 - p)],
        ])
        .unwrap();
        assert_close(out.matrix(), &want, 1e-15);
        assert!((out.matrix().trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_examples() {
        let dp = DecayParams::new(1.0).unwrap();
        let plus = DensityMatrix::plus_state();
        assert_eq!(ad_closed_form(&plus, dp, 0.0).unwrap(), plus);

        let e1 = (-1.0f64).exp();
        let want = CMatrix::from_real_rows(&[
            vec![(2.0 - e1) / 2.0, (-0.5f64).exp() / 2.0],
            vec![(-0.5f64).exp() / 2.0, e1 / 2.0],
        ])
        .unwrap();
        assert_close(
            ad_closed_form(&plus, dp, 1.0).unwrap().matrix(),
            &want,
            1e-16,
        );

        let ground = CMatrix::from_real_diagonal(&[1.0, 0.0]).unwrap();
        for rho in [excited(), plus.clone(), DensityMatrix::maximally_mixed(2)] {
            assert_close(
                ad_closed_form(&rho, dp, 800.0).unwrap().matrix(),
                &ground,
                1e-15,
            );
        }
        assert!(matches!(
            ad_closed_form(&plus, dp, -1.0),
            Err(ChannelError::NegativeTime(_))
        ));
    }

    #[test]
    fn iterated_channel_examples() {
        let dp = DecayParams::new(0.3).unwrap();
        let plus = DensityMatrix::plus_state();
        let once = iterate_channel(&plus, dp, 1.0, 1).unwrap();
        let direct = amplitude_damping_kraus(0.3).unwrap().apply(&plus).unwrap();
        assert_eq!(once, direct);

        let dp = DecayParams::new(1.0).unwrap();
        let rho = iterate_channel(&plus, dp, 1.0, 1000).unwrap();
        let excited_pop = 0.5 * 0.999f64.powi(1000);
        let err = (rho.matrix().get(1, 1).re - excited_pop).abs();
        assert!(err < 1e-13, "{err:e}");
        assert!((excited_pop - 0.183_847_7).abs() < 1e-7);

        let closed = ad_closed_form(&plus, dp, 1.0).unwrap();
        let gaps: Vec<f64> = [250, 500, 1000]
            .iter()
            .map(|&n| {
                iterate_channel(&plus, dp, 1.0, n)
                    .unwrap()
                    .matrix()
                    .distance(closed.matrix())
                    .unwrap()
            })
            .collect();
        for w in gaps.windows(2) {
            let ratio = w[0] / w[1];
            assert!((1.9..=2.1).contains(&ratio), "ratio {ratio}");
        }
        assert!(gaps[2] <= 2e-4);

        assert!(matches!(
            iterate_channel(&plus, DecayParams::new(5.0).unwrap(), 1.0, 2),
            Err(ChannelError::ProbabilityOutOfRange(_))
        ));
        assert!(matches!(
            iterate_channel(&plus, dp, 1.0, 0),
            Err(ChannelError::ZeroSteps)
        ));
    }

    #[test]
    fn rabi_examples() {
        let omega = 1.7;
        let g = rabi_state(omega, 0.0).unwrap();
        assert_eq!(
            g.matrix(),
            &CMatrix::from_real_diagonal(&[1.0, 0.0]).unwrap()
        );

        let e = rabi_state(omega, PI / omega).unwrap();
        assert_close(
            e.matrix(),
            &CMatrix::from_real_diagonal(&[0.0, 1.0]).unwrap(),
            1e-15,
        );

        let half = rabi_state(omega, PI / (2.0 * omega)).unwrap();
        assert!((half.matrix().get(0, 0).re - 0.5).abs() < 1e-15);
        assert!((half.matrix().get(1, 1).re - 0.5).abs() < 1e-15);
        assert!((half.matrix().get(0, 1).norm() - 0.5).abs() < 1e-15);

        for i in 0..50 {
            let rho = rabi_state(omega, i as f64 * 0.137).unwrap();
            assert!((rho.purity() - 1.0).abs() < 1e-12);
        }
        assert!(rabi_state(omega, -0.1).is_err());
    }

    #[test]
    fn rabi_matches_outer_product() {
        let omega = 2.3;
        for i in 0..30 {
            let t = i as f64 * 0.21;
            let psi = [
                Complex64::new((omega * t / 2.0).cos(), 0.0),
                Complex64::new(0.0, (omega * t / 2.0).sin()),
            ];
            let want = CMatrix::weighted_projector(&psi, 1.0);
            assert_close(rabi_state(omega, t).unwrap().matrix(), &want, 1e-15);
        }
    }
}
