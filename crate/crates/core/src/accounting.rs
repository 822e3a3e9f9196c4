//! First-law bookkeeping along a sampled trajectory (ρ(t), H(t)).
//!
//! The internal energy U = Σ_{n,k} E_n ρ_k |⟨n|k⟩|² changes through three
//! channels: work (level shifts dE_n), heat (state-eigenvalue changes dρ_k) and
//! coherence energy (overlap changes d|⟨n|k⟩|²). Each interval is integrated
//! with the midpoint product rule:
//!
//! ```text
//! dW = Σ (ρ_k w_nk)‾ ΔE_n
//! d𝒬 = Σ (E_n w_nk)‾ Δρ_k
//! d𝒞 = Σ (E_n ρ_k)‾ Δw_nk
//! ```
//!
//! The discrete product rule for three factors leaves a cross term
//! −½ ΣΔE_n Δρ_k Δw_nk. It is not assigned to any channel and is reported as
//! the step `residual`; its running sum is the ledger's closure defect.

use thiserror::Error;

use crate::linalg::{matched_overlaps, track_eigenpairs, SpectralDecomposition};
use crate::qstate::{
    entropy_of_spectrum, internal_energy, l1_coherence, overlap_matrix, DensityMatrix, Hamiltonian,
    OverlapMatrix, StateError,
};

/// Matched-branch overlap below which an interval is rejected as ambiguous.
pub const MIN_BRANCH_OVERLAP: f64 = 0.5;
/// Multiplier applied to the accumulated residual bound for identity checks.
pub const IDENTITY_FACTOR: f64 = 10.0;
/// Per-step floating-point allowance, in units of ε_mach · dim · energy scale.
const ROUNDOFF_ULPS_PER_STEP: f64 = 16.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AccountingError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error("a trajectory needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample {index}: time {t} is not finite")]
    NonFiniteTime { index: usize, t: f64 },
    #[error("sample {index}: time does not increase")]
    NonIncreasingTime { index: usize },
    #[error("sample {index}: dimension {found} differs from {expected}")]
    DimMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("interval {interval}: branch tracking ambiguous (matched overlap {overlap:.3e})")]
    TrackingFailure { interval: usize, overlap: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub hamiltonian: Hamiltonian,
    pub rho: DensityMatrix,
}

impl Sample {
    pub fn new(t: f64, hamiltonian: Hamiltonian, rho: DensityMatrix) -> Self {
        Self {
            t,
            hamiltonian,
            rho,
        }
    }
}

/// Time-ordered samples of one process.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    samples: Vec<Sample>,
}

impl Trajectory {
    pub fn new(samples: Vec<Sample>) -> Result<Self, AccountingError> {
        if samples.len() < 2 {
            return Err(AccountingError::TooFewSamples(samples.len()));
        }
        let dim = samples[0].rho.dim();
        for (index, s) in samples.iter().enumerate() {
            if !s.t.is_finite() {
                return Err(AccountingError::NonFiniteTime { index, t: s.t });
            }
            if index > 0 && s.t <= samples[index - 1].t {
                return Err(AccountingError::NonIncreasingTime { index });
            }
            for found in [s.rho.dim(), s.hamiltonian.dim()] {
                if found != dim {
                    return Err(AccountingError::DimMismatch {
                        index,
                        expected: dim,
                        found,
                    });
                }
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples[0].rho.dim()
    }

    /// The same path run backwards, with t ↦ t_first + t_last − t.
    pub fn time_reversed(&self) -> Self {
        let t0 = self.samples[0].t;
        let t1 = self.samples[self.samples.len() - 1].t;
        let samples = self
            .samples
            .iter()
            .rev()
            .map(|s| Sample::new(t0 + t1 - s.t, s.hamiltonian.clone(), s.rho.clone()))
            .collect();
        Self { samples }
    }
}

/// One sample resolved into tracked energy and state branches.
#[derive(Debug, Clone)]
pub struct TrackedSample {
    pub t: f64,
    pub energy_basis: SpectralDecomposition,
    pub state_basis: SpectralDecomposition,
    /// E_n by energy branch.
    pub energies: Vec<f64>,
    /// ρ_k by state branch.
    pub weights: Vec<f64>,
    /// |⟨n|k⟩|².
    pub overlap: OverlapMatrix,
    /// P_n = ⟨n|ρ|n⟩ by energy branch.
    pub populations: Vec<f64>,
    /// ε_k = ⟨k|H|k⟩ by state branch.
    pub diagonal_energies: Vec<f64>,
    pub internal_energy: f64,
    pub entropy: f64,
    pub l1_coherence: f64,
}

impl TrackedSample {
    pub fn first(sample: &Sample) -> Result<Self, AccountingError> {
        let energy_basis = sample.hamiltonian.eig()?;
        let state_basis = sample.rho.eig()?;
        Self::resolve(sample, energy_basis, state_basis)
    }

    /// Resolves `sample` with branch labels continued from `prev`.
    /// `interval` is only used to name the interval in a tracking failure.
    pub fn next(prev: &Self, sample: &Sample, interval: usize) -> Result<Self, AccountingError> {
        let energy_basis = track(&prev.energy_basis, sample.hamiltonian.eig()?, interval)?;
        let state_basis = track(&prev.state_basis, sample.rho.eig()?, interval)?;
        Self::resolve(sample, energy_basis, state_basis)
    }

    fn resolve(
        sample: &Sample,
        energy_basis: SpectralDecomposition,
        state_basis: SpectralDecomposition,
    ) -> Result<Self, AccountingError> {
        let h = sample.hamiltonian.matrix();
        let rho = sample.rho.matrix();
        let populations = energy_basis
            .vectors_by_branch()
            .iter()
            .map(|n| rho.sandwich(n, n).re)
            .collect();
        let diagonal_energies = state_basis
            .vectors_by_branch()
            .iter()
            .map(|k| h.sandwich(k, k).re)
            .collect();
        Ok(Self {
            t: sample.t,
            energies: energy_basis.values_by_branch(),
            weights: state_basis.values_by_branch(),
            overlap: overlap_matrix(&energy_basis, &state_basis)?,
            populations,
            diagonal_energies,
            internal_energy: internal_energy(&sample.rho, &sample.hamiltonian)?,
            entropy: entropy_of_spectrum(state_basis.values()),
            l1_coherence: l1_coherence(&sample.rho, &energy_basis)?,
            energy_basis,
            state_basis,
        })
    }

    fn energy_scale(&self) -> f64 {
        self.energies.iter().fold(0.0f64, |acc, e| acc.max(e.abs()))
    }
}

fn track(
    prev: &SpectralDecomposition,
    next: SpectralDecomposition,
    interval: usize,
) -> Result<SpectralDecomposition, AccountingError> {
    let tracked = track_eigenpairs(prev, &next).map_err(StateError::from)?;
    let overlaps = matched_overlaps(prev, &tracked).map_err(StateError::from)?;
    let worst = overlaps.iter().copied().fold(f64::INFINITY, f64::min);
    if worst < MIN_BRANCH_OVERLAP {
        return Err(AccountingError::TrackingFailure {
            interval,
            overlap: worst,
        });
    }
    Ok(tracked)
}

/// Energy increments over one interval.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepIncrement {
    /// Σ (ρ_k w_nk)‾ ΔE_n.
    pub dw: f64,
    /// Σ (E_n w_nk)‾ Δρ_k.
    pub dq_cal: f64,
    /// Σ (E_n ρ_k)‾ Δw_nk.
    pub dc: f64,
    /// tr(ρ_b H_b) − tr(ρ_a H_a).
    pub du: f64,
    /// du − dw − dq_cal − dc.
    pub residual: f64,
    /// Σ ρ̄_k Δε_k, computed directly from ε_k = ⟨k|H|k⟩.
    pub dw_cal: f64,
    /// Σ ε̄_k Δρ_k.
    pub dq_cal_direct: f64,
    /// Σ P̄_n ΔE_n with P_n = ⟨n|ρ|n⟩.
    pub dw_cl: f64,
    /// Σ Ē_n ΔP_n.
    pub dq_cl: f64,
}

fn mid(a: f64, b: f64) -> f64 {
    0.5 * (a + b)
}

pub fn step_increment(a: &TrackedSample, b: &TrackedSample) -> StepIncrement {
    let d = a.energies.len();
    let mut inc = StepIncrement::default();
    for n in 0..d {
        let (ea, eb) = (a.energies[n], b.energies[n]);
        for k in 0..d {
            let (ra, rb) = (a.weights[k], b.weights[k]);
            let (wa, wb) = (a.overlap.get(n, k), b.overlap.get(n, k));
            inc.dw += mid(ra * wa, rb * wb) * (eb - ea);
            inc.dq_cal += mid(ea * wa, eb * wb) * (rb - ra);
            inc.dc += mid(ea * ra, eb * rb) * (wb - wa);
        }
        inc.dw_cl += mid(a.populations[n], b.populations[n]) * (eb - ea);
        inc.dq_cl += mid(ea, eb) * (b.populations[n] - a.populations[n]);
    }
    for k in 0..d {
        let (ra, rb) = (a.weights[k], b.weights[k]);
        let (xa, xb) = (a.diagonal_energies[k], b.diagonal_energies[k]);
        inc.dw_cal += mid(ra, rb) * (xb - xa);
        inc.dq_cal_direct += mid(xa, xb) * (rb - ra);
    }
    inc.du = b.internal_energy - a.internal_energy;
    inc.residual = inc.du - inc.dw - inc.dq_cal - inc.dc;
    inc
}

/// Cumulative values at one sample time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRow {
    pub t: f64,
    pub u: f64,
    pub w: f64,
    pub q_cal: f64,
    pub c: f64,
    pub w_cal: f64,
    pub w_cl: f64,
    pub q_cl: f64,
    pub entropy: f64,
    pub l1_coherence: f64,
    /// |U(t) − U(0) − (W + 𝒬 + 𝒞)(t)|.
    pub closure_defect: f64,
    /// Σ |residual| plus a floating-point allowance, accumulated up to t.
    pub residual_bound: f64,
}

impl LedgerRow {
    pub fn delta_u(&self, initial: &LedgerRow) -> f64 {
        self.u - initial.u
    }

    /// |𝒲 − (W + 𝒞)|.
    pub fn work_identity_defect(&self) -> f64 {
        (self.w_cal - (self.w + self.c)).abs()
    }

    /// |Q − (𝒬 + 𝒞)|.
    pub fn heat_identity_defect(&self) -> f64 {
        (self.q_cl - (self.q_cal + self.c)).abs()
    }

    /// Bound that both identity defects must respect at this sample.
    pub fn closure_tolerance(&self) -> f64 {
        IDENTITY_FACTOR * self.residual_bound
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLedger {
    rows: Vec<LedgerRow>,
}

impl EnergyLedger {
    pub fn rows(&self) -> &[LedgerRow] {
        &self.rows
    }

    pub fn first(&self) -> &LedgerRow {
        &self.rows[0]
    }

    pub fn last(&self) -> &LedgerRow {
        &self.rows[self.rows.len() - 1]
    }

    pub fn max_closure_defect(&self) -> f64 {
        first_law_residual(self)
    }

    /// Samples where either identity defect exceeds the closure tolerance.
    pub fn identity_violations(&self) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| {
                r.work_identity_defect() > r.closure_tolerance()
                    || r.heat_identity_defect() > r.closure_tolerance()
            })
            .map(|(i, _)| i)
            .collect()
    }

    pub fn column(&self, f: impl Fn(&LedgerRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }
}

/// Folds [`step_increment`] along the trajectory with branch tracking threaded through.
pub fn analyze(traj: &Trajectory) -> Result<EnergyLedger, AccountingError> {
    let (tracked, increments) = resolve_all(traj)?;
    let dim = traj.dim() as f64;
    let first = &tracked[0];
    let mut rows = Vec::with_capacity(tracked.len());
    let mut row = LedgerRow {
        t: first.t,
        u: first.internal_energy,
        w: 0.0,
        q_cal: 0.0,
        c: 0.0,
        w_cal: 0.0,
        w_cl: 0.0,
        q_cl: 0.0,
        entropy: first.entropy,
        l1_coherence: first.l1_coherence,
        closure_defect: 0.0,
        residual_bound: 0.0,
    };
    rows.push(row);
    for (i, inc) in increments.iter().enumerate() {
        let (a, b) = (&tracked[i], &tracked[i + 1]);
        let scale = a.energy_scale().max(b.energy_scale());
        row.t = b.t;
        row.u = b.internal_energy;
        row.w += inc.dw;
        row.q_cal += inc.dq_cal;
        row.c += inc.dc;
        row.w_cal += inc.dw_cal;
        row.w_cl += inc.dw_cl;
        row.q_cl += inc.dq_cl;
        row.entropy = b.entropy;
        row.l1_coherence = b.l1_coherence;
        row.closure_defect = (row.u - first.internal_energy - (row.w + row.q_cal + row.c)).abs();
        row.residual_bound +=
            inc.residual.abs() + ROUNDOFF_ULPS_PER_STEP * f64::EPSILON * dim * scale;
        rows.push(row);
    }
    Ok(EnergyLedger { rows })
}

/// Cumulative work and heat of the two single-basis formalisms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalRow {
    pub t: f64,
    /// Σ P̄_n ΔE_n.
    pub w_cl: f64,
    /// Σ Ē_n ΔP_n.
    pub q_cl: f64,
    /// Σ ρ̄_k Δε_k.
    pub w_cal: f64,
    /// Σ ε̄_k Δρ_k.
    pub q_cal: f64,
}

pub fn classical_decompositions(traj: &Trajectory) -> Result<Vec<ClassicalRow>, AccountingError> {
    let (tracked, increments) = resolve_all(traj)?;
    let mut row = ClassicalRow {
        t: tracked[0].t,
        w_cl: 0.0,
        q_cl: 0.0,
        w_cal: 0.0,
        q_cal: 0.0,
    };
    let mut rows = vec![row];
    for (inc, b) in increments.iter().zip(&tracked[1..]) {
        row.t = b.t;
        row.w_cl += inc.dw_cl;
        row.q_cl += inc.dq_cl;
        row.w_cal += inc.dw_cal;
        row.q_cal += inc.dq_cal_direct;
        rows.push(row);
    }
    Ok(rows)
}

/// max_t |U(t) − U(0) − (W + 𝒬 + 𝒞)(t)|.
pub fn first_law_residual(ledger: &EnergyLedger) -> f64 {
    ledger
        .rows
        .iter()
        .map(|r| r.closure_defect)
        .fold(0.0, f64::max)
}

/// Tracks every sample and computes all interval increments.
pub fn resolve_all(
    traj: &Trajectory,
) -> Result<(Vec<TrackedSample>, Vec<StepIncrement>), AccountingError> {
    let samples = traj.samples();
    let mut tracked = Vec::with_capacity(samples.len());
    tracked.push(TrackedSample::first(&samples[0])?);
    for (i, s) in samples.iter().enumerate().skip(1) {
        let next = TrackedSample::next(&tracked[i - 1], s, i - 1)?;
        tracked.push(next);
    }
    let increments = tracked
        .windows(2)
        .map(|w| step_increment(&w[0], &w[1]))
        .collect();
    Ok((tracked, increments))
}
