//! Built-in two-level processes and their closed-form energy references.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::accounting::{AccountingError, Sample, Trajectory};
use crate::channels::{ad_closed_form, rabi_state, ChannelError, DecayParams};
use crate::linalg::Complex64;
use crate::qstate::{
    free_energy, gibbs_state, von_neumann_entropy, DensityMatrix, Hamiltonian, StateError,
    ThermalParams,
};

/// eħ/2m_e in eV/T.
pub const BOHR_MAGNETON_EV_PER_T: f64 = 5.788_381_806_0e-5;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Accounting(#[from] AccountingError),
}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::InvalidSpec(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Zeeman,
    Rabi,
    SpontaneousEmission,
    Isothermal,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [
        ScenarioKind::Zeeman,
        ScenarioKind::Rabi,
        ScenarioKind::SpontaneousEmission,
        ScenarioKind::Isothermal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Zeeman => "zeeman",
            ScenarioKind::Rabi => "rabi",
            ScenarioKind::SpontaneousEmission => "spontaneous_emission",
            ScenarioKind::Isothermal => "isothermal",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zeeman" => Ok(ScenarioKind::Zeeman),
            "rabi" => Ok(ScenarioKind::Rabi),
            "se" | "spontaneous_emission" | "spontaneous-emission" => {
                Ok(ScenarioKind::SpontaneousEmission)
            }
            "isothermal" => Ok(ScenarioKind::Isothermal),
            other => Err(invalid(format!("unknown scenario `{other}`"))),
        }
    }
}

/// Parameters for one built-in process. Fields not used by `kind` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub e_g: f64,
    pub e_e: f64,
    /// Rabi frequency Ω_R.
    pub omega: Option<f64>,
    /// Decay rate Γ.
    pub gamma: Option<f64>,
    /// Total Zeeman shift of E_e; takes precedence over `b_field`.
    pub shift: Option<f64>,
    pub b_field: Option<f64>,
    /// Shift per unit field, default [`BOHR_MAGNETON_EV_PER_T`].
    pub shift_coefficient: Option<f64>,
    pub temperature: Option<f64>,
    /// Final E_e of the isothermal ramp.
    pub e_e_end: Option<f64>,
    pub t_max: f64,
    pub steps: usize,
}

impl ScenarioSpec {
    fn base(kind: ScenarioKind, e_g: f64, e_e: f64, t_max: f64, steps: usize) -> Self {
        Self {
            kind,
            e_g,
            e_e,
            omega: None,
            gamma: None,
            shift: None,
            b_field: None,
            shift_coefficient: None,
            temperature: None,
            e_e_end: None,
            t_max,
            steps,
        }
    }

    pub fn rabi(e_g: f64, e_e: f64, omega: f64, t_max: f64, steps: usize) -> Self {
        Self {
            omega: Some(omega),
            ..Self::base(ScenarioKind::Rabi, e_g, e_e, t_max, steps)
        }
    }

    pub fn spontaneous_emission(e_g: f64, e_e: f64, gamma: f64, t_max: f64, steps: usize) -> Self {
        Self {
            gamma: Some(gamma),
            ..Self::base(ScenarioKind::SpontaneousEmission, e_g, e_e, t_max, steps)
        }
    }

    pub fn zeeman(e_g: f64, e_e: f64, shift: f64, t_max: f64, steps: usize) -> Self {
        Self {
            shift: Some(shift),
            ..Self::base(ScenarioKind::Zeeman, e_g, e_e, t_max, steps)
        }
    }

    pub fn isothermal(
        e_g: f64,
        e_e: f64,
        e_e_end: f64,
        temperature: f64,
        t_max: f64,
        steps: usize,
    ) -> Self {
        Self {
            e_e_end: Some(e_e_end),
            temperature: Some(temperature),
            ..Self::base(ScenarioKind::Isothermal, e_g, e_e, t_max, steps)
        }
    }

    pub fn with_steps(&self, steps: usize) -> Self {
        Self {
            steps,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.steps < 2 {
            return Err(invalid(format!(
                "steps must be at least 2, got {}",
                self.steps
            )));
        }
        if !self.t_max.is_finite() || self.t_max <= 0.0 {
            return Err(invalid(format!(
                "t_max must be positive, got {}",
                self.t_max
            )));
        }
        if !self.e_g.is_finite() || !self.e_e.is_finite() {
            return Err(invalid("energies must be finite"));
        }
        if self.e_e <= self.e_g {
            return Err(invalid(format!(
                "E_e must exceed E_g (E_g = {}, E_e = {})",
                self.e_g, self.e_e
            )));
        }
        match self.kind {
            ScenarioKind::Rabi => {
                let omega = self.omega.ok_or_else(|| invalid("rabi requires omega"))?;
                if !omega.is_finite() || omega <= 0.0 {
                    return Err(invalid(format!("omega must be positive, got {omega}")));
                }
            }
            ScenarioKind::SpontaneousEmission => {
                let gamma = self
                    .gamma
                    .ok_or_else(|| invalid("spontaneous_emission requires gamma"))?;
                if !gamma.is_finite() || gamma < 0.0 {
                    return Err(invalid(format!("gamma must be non-negative, got {gamma}")));
                }
            }
            ScenarioKind::Zeeman => {
                let shift = self.zeeman_shift()?;
                if !shift.is_finite() {
                    return Err(invalid("zeeman shift must be finite"));
                }
                if self.e_e + shift <= self.e_g {
                    return Err(invalid("zeeman shift must keep E_e above E_g"));
                }
            }
            ScenarioKind::Isothermal => {
                let t = self
                    .temperature
                    .ok_or_else(|| invalid("isothermal requires temperature"))?;
                if !t.is_finite() || t <= 0.0 {
                    return Err(invalid(format!("temperature must be positive, got {t}")));
                }
                let end = self
                    .e_e_end
                    .ok_or_else(|| invalid("isothermal requires e_e_end"))?;
                if !end.is_finite() || end <= self.e_g {
                    return Err(invalid(format!("e_e_end must exceed E_g, got {end}")));
                }
            }
        }
        Ok(())
    }

    /// Total shift of E_e for the Zeeman ramp.
    pub fn zeeman_shift(&self) -> Result<f64, ScenarioError> {
        if let Some(shift) = self.shift {
            return Ok(shift);
        }
        let b = self
            .b_field
            .ok_or_else(|| invalid("zeeman requires shift or b_field"))?;
        Ok(b * self.shift_coefficient.unwrap_or(BOHR_MAGNETON_EV_PER_T))
    }

    pub fn times(&self) -> Vec<f64> {
        let dt = self.t_max / self.steps as f64;
        (0..=self.steps)
            .map(|i| {
                if i == self.steps {
                    self.t_max
                } else {
                    i as f64 * dt
                }
            })
            .collect()
    }

    fn sample_at(&self, t: f64) -> Result<Sample, ScenarioError> {
        let s = t / self.t_max;
        let sample = match self.kind {
            ScenarioKind::Rabi => Sample::new(
                t,
                Hamiltonian::two_level(self.e_g, self.e_e)?,
                rabi_state(self.omega.unwrap_or_default(), t)?,
            ),
            ScenarioKind::SpontaneousEmission => Sample::new(
                t,
                Hamiltonian::two_level(self.e_g, self.e_e)?,
                ad_closed_form(
                    &DensityMatrix::plus_state(),
                    DecayParams::new(self.gamma.unwrap_or_default())?,
                    t,
                )?,
            ),
            ScenarioKind::Zeeman => Sample::new(
                t,
                Hamiltonian::two_level(self.e_g, self.e_e + s * self.zeeman_shift()?)?,
                DensityMatrix::diagonal(&[0.0, 1.0])?,
            ),
            ScenarioKind::Isothermal => {
                let h = self.isothermal_hamiltonian(s)?;
                let th = ThermalParams::new(self.temperature.unwrap_or_default())?;
                let rho = gibbs_state(&h, th)?;
                Sample::new(t, h, rho)
            }
        };
        Ok(sample)
    }

    fn isothermal_hamiltonian(&self, s: f64) -> Result<Hamiltonian, ScenarioError> {
        let end = self.e_e_end.unwrap_or(self.e_e);
        Ok(Hamiltonian::two_level(
            self.e_g,
            self.e_e + s * (end - self.e_e),
        )?)
    }
}

/// Samples the process on a uniform grid of `steps + 1` points over [0, t_max].
pub fn build_trajectory(spec: &ScenarioSpec) -> Result<Trajectory, ScenarioError> {
    spec.validate()?;
    let samples = spec
        .times()
        .into_iter()
        .map(|t| spec.sample_at(t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Trajectory::new(samples)?)
}

/// 𝒞(t) = E_g[cos²(Ω_R t/2) − 1] + E_e sin²(Ω_R t/2).
pub fn rabi_c_analytic(e_g: f64, e_e: f64, omega: f64, t: f64) -> f64 {
    let half = omega * t / 2.0;
    e_g * (half.cos().powi(2) - 1.0) + e_e * half.sin().powi(2)
}

/// Eigenpairs of the decaying plus state at unit decay rate, ρ₀ ≥ ρ₁.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeEigensystem {
    pub rho0: f64,
    pub rho1: f64,
    /// Real components (g, e).
    pub k0: [f64; 2],
    pub k1: [f64; 2],
}

impl SeEigensystem {
    pub fn k0_complex(&self) -> [Complex64; 2] {
        [
            Complex64::new(self.k0[0], 0.0),
            Complex64::new(self.k0[1], 0.0),
        ]
    }

    pub fn k1_complex(&self) -> [Complex64; 2] {
        [
            Complex64::new(self.k1[0], 0.0),
            Complex64::new(self.k1[1], 0.0),
        ]
    }

    /// ρ₀ − ρ₁ = √(1 − e^{−t} + e^{−2t}).
    pub fn gap(&self) -> f64 {
        self.rho0 - self.rho1
    }
}

/// Closed-form eigensystem for Γ = 1, written in x = e^{−t} so that it stays
/// finite and free of cancellation for every t ≥ 0. With
/// s = √(1 − x + x²) and r = √x / (1 − x + s):
/// ρ₀,₁ = (1 ± s)/2, |k₀⟩ ∝ (1, r), |k₁⟩ ∝ (−r, 1).
pub fn se_eigensystem_analytic(t: f64) -> SeEigensystem {
    let x = (-t).exp();
    let s = (1.0 - x + x * x).sqrt();
    let rho0 = 0.5 * (1.0 + s);
    let rho1 = 0.5 * (x - x * x) / (1.0 + s);
    let r = x.sqrt() / (1.0 - x + s);
    let norm = (1.0 + r * r).sqrt();
    SeEigensystem {
        rho0,
        rho1,
        k0: [1.0 / norm, r / norm],
        k1: [-r / norm, 1.0 / norm],
    }
}

/// 𝒬(t) for Γ = 1:
/// ¼ΔE[2e^{−t} − ½ln(e^{−2t} − e^{−t} + 1) − √3·atan((2e^{−t} − 1)/√3) + π/(2√3) − 2].
pub fn se_q_analytic(e_g: f64, e_e: f64, t: f64) -> f64 {
    let x = (-t).exp();
    0.25 * (e_e - e_g)
        * (2.0 * x - 0.5 * (x * x - x + 1.0).ln() - SQRT_3 * ((2.0 * x - 1.0) / SQRT_3).atan()
            + PI / (2.0 * SQRT_3)
            - 2.0)
}

/// 𝒞(t) for Γ = 1:
/// ¼ΔE[½ln(e^{2t} − e^t + 1) − √3·atan((2e^t − 1)/√3) − t + π/(2√3)].
/// The logarithm is evaluated as t + ½ln(1 − e^{−t} + e^{−2t}) − t.
pub fn se_c_analytic(e_g: f64, e_e: f64, t: f64) -> f64 {
    let x = (-t).exp();
    let et = t.exp();
    0.25 * (e_e - e_g)
        * (0.5 * (1.0 - x + x * x).ln() - SQRT_3 * ((2.0 * et - 1.0) / SQRT_3).atan()
            + PI / (2.0 * SQRT_3))
}

/// t → ∞ limits (𝒬, 𝒞) = ¼ΔE·(π/√3 − 2, −π/√3).
pub fn se_limits(e_g: f64, e_e: f64) -> (f64, f64) {
    let de = e_e - e_g;
    (0.25 * de * (PI / SQRT_3 - 2.0), -0.25 * de * PI / SQRT_3)
}

/// Free-energy and entropy changes across an isothermal ramp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsothermalReference {
    pub delta_f: f64,
    pub t_delta_s: f64,
}

pub fn isothermal_reference(spec: &ScenarioSpec) -> Result<IsothermalReference, ScenarioError> {
    if spec.kind != ScenarioKind::Isothermal {
        return Err(invalid("isothermal reference requires an isothermal spec"));
    }
    spec.validate()?;
    isothermal_reference_at(spec, 1.0)
}

fn isothermal_reference_at(
    spec: &ScenarioSpec,
    s: f64,
) -> Result<IsothermalReference, ScenarioError> {
    let th = ThermalParams::new(spec.temperature.unwrap_or_default())?;
    let h0 = spec.isothermal_hamiltonian(0.0)?;
    let h1 = spec.isothermal_hamiltonian(s)?;
    let s0 = von_neumann_entropy(&gibbs_state(&h0, th)?)?;
    let s1 = von_neumann_entropy(&gibbs_state(&h1, th)?)?;
    Ok(IsothermalReference {
        delta_f: free_energy(&h1, th)? - free_energy(&h0, th)?,
        t_delta_s: th.temperature() * (s1 - s0),
    })
}

/// Reference values of the cumulative ledger columns at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferencePoint {
    pub w: f64,
    pub q: f64,
    pub c: f64,
    pub u: f64,
}

/// Closed-form W, 𝒬, 𝒞 and U along a built-in scenario.
///
/// Spontaneous emission at rate Γ uses the unit-rate forms at Γt: the state
/// depends on t only through Γt, and the three integrals are invariant under
/// reparametrizing time.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticReference {
    spec: ScenarioSpec,
}

impl AnalyticReference {
    pub fn new(spec: &ScenarioSpec) -> Result<Self, ScenarioError> {
        spec.validate()?;
        Ok(Self { spec: spec.clone() })
    }

    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    pub fn at(&self, t: f64) -> Result<ReferencePoint, ScenarioError> {
        let sp = &self.spec;
        let (e_g, e_e) = (sp.e_g, sp.e_e);
        let u0 = match sp.kind {
            ScenarioKind::Rabi => e_g,
            ScenarioKind::SpontaneousEmission => 0.5 * (e_g + e_e),
            ScenarioKind::Zeeman => e_e,
            ScenarioKind::Isothermal => {
                let th = ThermalParams::new(sp.temperature.unwrap_or_default())?;
                let h0 = sp.isothermal_hamiltonian(0.0)?;
                crate::qstate::internal_energy(&gibbs_state(&h0, th)?, &h0)?
            }
        };
        let point = match sp.kind {
            ScenarioKind::Rabi => {
                let c = rabi_c_analytic(e_g, e_e, sp.omega.unwrap_or_default(), t);
                ReferencePoint {
                    w: 0.0,
                    q: 0.0,
                    c,
                    u: u0 + c,
                }
            }
            ScenarioKind::SpontaneousEmission => {
                let tau = sp.gamma.unwrap_or_default() * t;
                let q = se_q_analytic(e_g, e_e, tau);
                let c = se_c_analytic(e_g, e_e, tau);
                ReferencePoint {
                    w: 0.0,
                    q,
                    c,
                    u: e_g + 0.5 * (e_e - e_g) * (-tau).exp(),
                }
            }
            ScenarioKind::Zeeman => {
                let w = sp.zeeman_shift()? * t / sp.t_max;
                ReferencePoint {
                    w,
                    q: 0.0,
                    c: 0.0,
                    u: u0 + w,
                }
            }
            ScenarioKind::Isothermal => {
                let r = isothermal_reference_at(sp, t / sp.t_max)?;
                ReferencePoint {
                    w: r.delta_f,
                    q: r.t_delta_s,
                    c: 0.0,
                    u: u0 + r.delta_f + r.t_delta_s,
                }
            }
        };
        Ok(point)
    }
}
