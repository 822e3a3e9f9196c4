//! Self-checks of the whole pipeline against closed-form and brute-force oracles.

use std::f64::consts::PI;
use std::fmt;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::accounting::{analyze, resolve_all, EnergyLedger, Sample, Trajectory};
use crate::channels::{iterate_channel, DecayParams};
use crate::linalg::{hermitian_eig, CMatrix, Complex64};
use crate::qstate::{DensityMatrix, Hamiltonian};
use crate::scenarios::{build_trajectory, isothermal_reference, ScenarioSpec};

/// Closed forms the checks compare against. Swappable for fault injection.
#[derive(Clone, Copy)]
pub struct Oracles {
    /// 𝒞(E_g, E_e, Ω_R, t) of resonant Rabi cycling from |g⟩.
    pub rabi_c: fn(f64, f64, f64, f64) -> f64,
    /// 𝒬(t) of the decaying plus state, unit rate and unit gap.
    pub se_q: fn(f64) -> f64,
    /// 𝒞(t) of the decaying plus state, unit rate and unit gap.
    pub se_c: fn(f64) -> f64,
    /// Eigenvalues (ρ₀, ρ₁) of the decaying plus state at unit rate.
    pub se_eigenvalues: fn(f64) -> (f64, f64),
    /// Decaying plus state at unit rate, real 2x2 in the (g, e) basis.
    pub se_state: fn(f64) -> [[f64; 2]; 2],
    /// Free-energy change of diag(0, a) → diag(0, b) at temperature T.
    pub two_level_delta_f: fn(f64, f64, f64) -> f64,
}

fn rabi_c_formula(e_g: f64, e_e: f64, omega: f64, t: f64) -> f64 {
    let half = omega * t / 2.0;
    e_g * (half.cos().powi(2) - 1.0) + e_e * half.sin().powi(2)
}

fn se_q_formula(t: f64) -> f64 {
    let x = (-t).exp();
    let r3 = 3f64.sqrt();
    0.25 * (2.0 * x - 0.5 * (x * x - x + 1.0).ln() - r3 * ((2.0 * x - 1.0) / r3).atan()
        + PI / (2.0 * r3)
        - 2.0)
}

fn se_c_formula(t: f64) -> f64 {
    // ½ln(e^{2t} − e^t + 1) − t rewritten to avoid overflow
    let x = (-t).exp();
    let r3 = 3f64.sqrt();
    0.25 * (0.5 * (1.0 - x + x * x).ln() - r3 * ((2.0 * t.exp() - 1.0) / r3).atan()
        + PI / (2.0 * r3))
}

fn se_eigenvalues_formula(t: f64) -> (f64, f64) {
    let et = t.exp();
    let root = (et * et - et + 1.0).sqrt();
    (
        0.5 * (-t).exp() * (et + root),
        0.5 * (-t).exp() * (et - root),
    )
}

fn se_state_formula(t: f64) -> [[f64; 2]; 2] {
    let pe = 0.5 * (-t).exp();
    let coh = 0.5 * (-t / 2.0).exp();
    [[1.0 - pe, coh], [coh, pe]]
}

fn two_level_delta_f_formula(a: f64, b: f64, temperature: f64) -> f64 {
    -temperature * ((1.0 + (-b / temperature).exp()) / (1.0 + (-a / temperature).exp())).ln()
}

impl Default for Oracles {
    fn default() -> Self {
        Self {
            rabi_c: rabi_c_formula,
            se_q: se_q_formula,
            se_c: se_c_formula,
            se_eigenvalues: se_eigenvalues_formula,
            se_state: se_state_formula,
            two_level_delta_f: two_level_delta_f_formula,
        }
    }
}

impl Oracles {
    /// Oracles with the Rabi frequency inside the coherence-energy formula off by 0.1 %.
    pub fn with_corrupted_rabi_constant() -> Self {
        fn corrupted(e_g: f64, e_e: f64, omega: f64, t: f64) -> f64 {
            rabi_c_formula(e_g, e_e, omega * 1.001, t)
        }
        Self {
            rabi_c: corrupted,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} [{}] {}: {}", self.id, self.name, self.detail)
    }
}

pub const CHECK_NAMES: [&str; 8] = [
    "rabi_oracle",
    "spontaneous_emission_oracle",
    "first_law_closure",
    "consistency_identities",
    "isothermal_limit",
    "kraus_limit",
    "eigensolver_oracle",
    "heat_sign_change",
];

fn result(id: usize, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        id,
        name: CHECK_NAMES[id - 1],
        passed,
        detail,
    }
}

fn failed(id: usize, err: impl fmt::Display) -> CheckResult {
    result(id, false, format!("error: {err}"))
}

fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

pub fn rabi_spec() -> ScenarioSpec {
    ScenarioSpec::rabi(0.0, 1.0, PI, 1.0, 2000)
}

pub fn spontaneous_emission_spec() -> ScenarioSpec {
    ScenarioSpec::spontaneous_emission(0.0, 1.0, 1.0, 10.0, 5000)
}

pub fn zeeman_spec() -> ScenarioSpec {
    ScenarioSpec::zeeman(0.0, 1.0, 0.5, 1.0, 2000)
}

pub fn isothermal_spec() -> ScenarioSpec {
    ScenarioSpec::isothermal(0.0, 1.0, 2.0, 1.0, 1.0, 4000)
}

pub fn builtin_specs() -> Vec<ScenarioSpec> {
    vec![
        rabi_spec(),
        spontaneous_emission_spec(),
        zeeman_spec(),
        isothermal_spec(),
    ]
}

fn run_spec(spec: &ScenarioSpec) -> Result<EnergyLedger, String> {
    let traj = build_trajectory(spec).map_err(|e| e.to_string())?;
    analyze(&traj).map_err(|e| e.to_string())
}

pub fn check_rabi(oracles: &Oracles) -> CheckResult {
    let spec = rabi_spec();
    let (ledger, elapsed) = timed(|| run_spec(&spec));
    let ledger = match ledger {
        Ok(l) => l,
        Err(e) => return failed(1, e),
    };
    let omega = spec.omega.unwrap_or_default();
    let c_err = max_abs(
        ledger
            .rows()
            .iter()
            .map(|r| r.c - (oracles.rabi_c)(spec.e_g, spec.e_e, omega, r.t)),
    );
    let wq = max_abs(ledger.rows().iter().flat_map(|r| [r.w, r.q_cal]));
    let du = ledger.last().delta_u(ledger.first());
    let passed = c_err <= 1e-6
        && wq <= 1e-10
        && (du - 1.0).abs() <= 1e-6
        && elapsed < Duration::from_secs(1);
    result(
        1,
        passed,
        format!(
            "max|C - C_ref| = {c_err:.3e}, max|W|,|Q| = {wq:.3e}, dU = {du:.12}, {:.3} s",
            elapsed.as_secs_f64()
        ),
    )
}

pub fn check_spontaneous_emission(oracles: &Oracles) -> CheckResult {
    let spec = spontaneous_emission_spec();
    let (ledger, elapsed) = timed(|| run_spec(&spec));
    let ledger = match ledger {
        Ok(l) => l,
        Err(e) => return failed(2, e),
    };
    let q_err = max_abs(ledger.rows().iter().map(|r| r.q_cal - (oracles.se_q)(r.t)));
    let c_err = max_abs(ledger.rows().iter().map(|r| r.c - (oracles.se_c)(r.t)));
    let last = ledger.last();
    let q_end = (last.q_cal - (-0.046_550)).abs();
    let c_end = (last.c - (-0.453_450)).abs();
    let w = max_abs(ledger.column(|r| r.w));
    let du = last.delta_u(ledger.first());
    let passed = q_err <= 1e-4
        && c_err <= 1e-4
        && q_end <= 2e-4
        && c_end <= 2e-4
        && w <= 1e-12
        && (du + 0.5).abs() <= 2e-4
        && elapsed < Duration::from_secs(5);
    result(
        2,
        passed,
        format!(
            "max|Q - Q_ref| = {q_err:.3e}, max|C - C_ref| = {c_err:.3e}, Q(10) = {:.6}, C(10) = {:.6}, \
             max|W| = {w:.1e}, dU(10) = {du:.6}, {:.3} s",
            last.q_cal,
            last.c,
            elapsed.as_secs_f64()
        ),
    )
}

/// Closure defects of one scenario at `steps` and `2 * steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refinement {
    pub coarse: f64,
    pub fine: f64,
}

impl Refinement {
    pub fn ratio(&self) -> f64 {
        self.coarse / self.fine
    }
}

pub fn closure_refinement(spec: &ScenarioSpec) -> Result<Refinement, String> {
    let coarse = run_spec(spec)?.max_closure_defect();
    let fine = run_spec(&spec.with_steps(2 * spec.steps))?.max_closure_defect();
    Ok(Refinement { coarse, fine })
}

pub fn check_closure() -> CheckResult {
    let mut passed = true;
    let mut parts = Vec::new();
    for spec in builtin_specs() {
        match closure_refinement(&spec) {
            Ok(r) => {
                let ok = spec.steps >= 2000
                    && r.coarse <= 1e-6
                    && r.fine <= 1e-6
                    && (3.5..=4.5).contains(&r.ratio());
                passed &= ok;
                parts.push(format!(
                    "{} N={} defect {:.3e} -> {:.3e} ratio {:.3}",
                    spec.kind,
                    spec.steps,
                    r.coarse,
                    r.fine,
                    r.ratio()
                ));
            }
            Err(e) => return failed(3, format!("{}: {e}", spec.kind)),
        }
    }
    result(3, passed, parts.join("; "))
}

fn identity_excess(ledger: &EnergyLedger) -> (usize, f64) {
    let worst = ledger
        .rows()
        .iter()
        .map(|r| {
            r.work_identity_defect().max(r.heat_identity_defect())
                / r.closure_tolerance().max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max);
    (ledger.identity_violations().len(), worst)
}

pub fn check_identities() -> CheckResult {
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for spec in builtin_specs() {
        match run_spec(&spec) {
            Ok(l) => {
                let (v, w) = identity_excess(&l);
                violations += v;
                worst = worst.max(w);
            }
            Err(e) => return failed(4, format!("{}: {e}", spec.kind)),
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..50 {
        let dim = rng.gen_range(2..=4);
        let traj = match random_smooth_trajectory(&mut rng, dim, 1.0, 400) {
            Ok(t) => t,
            Err(e) => return failed(4, format!("synthetic {i}: {e}")),
        };
        match analyze(&traj) {
            Ok(l) => {
                let (v, w) = identity_excess(&l);
                violations += v;
                worst = worst.max(w);
            }
            Err(e) => return failed(4, format!("synthetic {i}: {e}")),
        }
    }
    result(
        4,
        violations == 0,
        format!("{violations} samples outside tolerance; worst defect/tolerance = {worst:.3}"),
    )
}

pub fn check_isothermal(oracles: &Oracles) -> CheckResult {
    let spec = isothermal_spec();
    let ledger = match run_spec(&spec) {
        Ok(l) => l,
        Err(e) => return failed(5, e),
    };
    let reference = match isothermal_reference(&spec) {
        Ok(r) => r,
        Err(e) => return failed(5, e),
    };
    let temperature = spec.temperature.unwrap_or_default();
    let expected_f = (oracles.two_level_delta_f)(1.0, 2.0, temperature);
    let last = ledger.last();
    let w_err = (last.w - reference.delta_f).abs();
    let q_err = (last.q_cl - reference.t_delta_s).abs();
    let f_err = (reference.delta_f - expected_f).abs();
    let c = max_abs(ledger.column(|r| r.c));
    let passed = w_err <= 1e-6 && q_err <= 1e-6 && f_err <= 1e-12 && c <= 1e-12;
    result(
        5,
        passed,
        format!(
            "|W - dF| = {w_err:.3e}, |Q_cl - T dS| = {q_err:.3e}, dF = {:.12} (closed form off by {f_err:.1e}), max|C| = {c:.1e}",
            reference.delta_f
        ),
    )
}

pub fn check_kraus(oracles: &Oracles) -> CheckResult {
    let target = (oracles.se_state)(1.0);
    let target = match CMatrix::from_real_rows(&[target[0].to_vec(), target[1].to_vec()]) {
        Ok(m) => m,
        Err(e) => return failed(6, e),
    };
    let dp = match DecayParams::new(1.0) {
        Ok(d) => d,
        Err(e) => return failed(6, e),
    };
    let mut gaps = Vec::new();
    for n in [250, 500, 1000] {
        match iterate_channel(&DensityMatrix::plus_state(), dp, 1.0, n) {
            Ok(rho) => gaps.push(rho.matrix().distance(&target).unwrap_or(f64::INFINITY)),
            Err(e) => return failed(6, e),
        }
    }
    let r1 = gaps[0] / gaps[1];
    let r2 = gaps[1] / gaps[2];
    let passed = gaps[2] <= 2e-4 && (1.9..=2.1).contains(&r1) && (1.9..=2.1).contains(&r2);
    result(
        6,
        passed,
        format!(
            "distance n=250,500,1000: {:.3e}, {:.3e}, {:.3e}; halving ratios {r1:.3}, {r2:.3}",
            gaps[0], gaps[1], gaps[2]
        ),
    )
}

pub fn check_eigensolver(oracles: &Oracles) -> CheckResult {
    let mut value_err: f64 = 0.0;
    for i in 0..20 {
        let t = 10.0 * i as f64 / 19.0;
        let s = (oracles.se_state)(t);
        let m = match CMatrix::from_real_rows(&[s[0].to_vec(), s[1].to_vec()]) {
            Ok(m) => m,
            Err(e) => return failed(7, e),
        };
        let d = match hermitian_eig(&m) {
            Ok(d) => d,
            Err(e) => return failed(7, e),
        };
        let (r0, r1) = (oracles.se_eigenvalues)(t);
        // ascending order: ρ₁ first
        value_err = value_err
            .max((d.values()[0] - r1).abs())
            .max((d.values()[1] - r0).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let dim = rng.gen_range(2..=8);
        let a = random_hermitian(&mut rng, dim);
        match hermitian_eig(&a).and_then(|d| d.reconstruction_defect(&a)) {
            Ok(defect) => worst = worst.max(defect / a.frobenius_norm().max(f64::MIN_POSITIVE)),
            Err(e) => return failed(7, e),
        }
    }
    result(
        7,
        value_err <= 1e-10 && worst <= 1e-10,
        format!("max eigenvalue error {value_err:.3e}; worst relative reconstruction defect {worst:.3e}"),
    )
}

/// Root of the heat rate of the oracle on (lo, hi), by bisection on a central difference.
fn heat_turning_point(oracles: &Oracles, mut lo: f64, mut hi: f64) -> f64 {
    let rate = |t: f64| (oracles.se_q)(t + 1e-6) - (oracles.se_q)(t - 1e-6);
    let sign_lo = rate(lo).signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if rate(mid).signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn check_heat_sign_change(oracles: &Oracles) -> CheckResult {
    let spec = spontaneous_emission_spec();
    let traj = match build_trajectory(&spec) {
        Ok(t) => t,
        Err(e) => return failed(8, e),
    };
    let (tracked, increments) = match resolve_all(&traj) {
        Ok(x) => x,
        Err(e) => return failed(8, e),
    };
    let signs: Vec<(usize, f64)> = increments
        .iter()
        .enumerate()
        .filter(|(_, inc)| inc.dq_cal != 0.0)
        .map(|(i, inc)| (i, inc.dq_cal.signum()))
        .collect();
    let changes: Vec<usize> = signs
        .windows(2)
        .filter(|w| w[0].1 != w[1].1)
        .map(|w| w[1].0)
        .collect();
    let dt = spec.t_max / spec.steps as f64;
    let expected_first = ((oracles.se_q)(dt) - (oracles.se_q)(0.0)).signum();
    let t_star = heat_turning_point(oracles, dt, spec.t_max - dt);

    // 𝒞 never rises again once it has started to fall
    let first_fall = increments.iter().position(|inc| inc.dc < 0.0);
    let c_monotone = first_fall.is_some_and(|k| increments[k..].iter().all(|inc| inc.dc <= 0.0));

    let (passed, where_) = match changes.as_slice() {
        [k] => {
            let t_change = tracked[*k].t;
            let ok = signs[0].1 == expected_first && (t_change - t_star).abs() <= dt;
            (
                ok,
                format!("increment sign flips at t = {t_change:.4} (oracle {t_star:.4})"),
            )
        }
        other => (false, format!("{} sign changes", other.len())),
    };
    let direction = if signs.first().map(|s| s.1) == Some(1.0) {
        "rises then falls"
    } else {
        "falls then rises"
    };
    result(
        8,
        passed && c_monotone,
        format!("Q {direction}; {where_}; C monotone after plateau: {c_monotone}"),
    )
}

/// Runs every check in order.
pub fn run_all(oracles: &Oracles) -> Vec<CheckResult> {
    vec![
        check_rabi(oracles),
        check_spontaneous_emission(oracles),
        check_closure(),
        check_identities(),
        check_isothermal(oracles),
        check_kraus(oracles),
        check_eigensolver(oracles),
        check_heat_sign_change(oracles),
    ]
}

/// Entries uniform in [−1, 1] for both real and imaginary parts, then symmetrized.
pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        data[i * dim + i] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
        for j in i + 1..dim {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            data[i * dim + j] = z;
            data[j * dim + i] = z.conj();
        }
    }
    CMatrix::new(dim, data).expect("finite square data")
}

/// A complex plane rotation acting on levels (p, q) with smoothly varying angles.
#[derive(Debug, Clone)]
struct Rotation {
    p: usize,
    q: usize,
    angle: [f64; 4],
    phase: [f64; 2],
}

impl Rotation {
    fn random<R: Rng>(rng: &mut R, dim: usize) -> Self {
        let p = rng.gen_range(0..dim - 1);
        let q = rng.gen_range(p + 1..dim);
        Self {
            p,
            q,
            angle: [
                rng.gen_range(-PI..PI),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..0.3),
                rng.gen_range(0.5..3.0),
            ],
            phase: [rng.gen_range(-PI..PI), rng.gen_range(-1.0..1.0)],
        }
    }

    fn matrix(&self, dim: usize, t: f64) -> CMatrix {
        let [a, b, amp, freq] = self.angle;
        let theta = a + b * t + amp * (freq * t).sin();
        let phi = self.phase[0] + self.phase[1] * t;
        let (c, s) = (theta.cos(), theta.sin());
        let e = Complex64::from_polar(1.0, phi);
        let mut data = CMatrix::identity(dim).as_slice().to_vec();
        let (p, q) = (self.p, self.q);
        data[p * dim + p] = Complex64::new(c, 0.0);
        data[q * dim + q] = Complex64::new(c, 0.0);
        data[p * dim + q] = -e * s;
        data[q * dim + p] = e.conj() * s;
        CMatrix::new(dim, data).expect("finite rotation")
    }
}

fn unitary(rotations: &[Rotation], dim: usize, t: f64) -> CMatrix {
    rotations
        .iter()
        .fold(CMatrix::identity(dim), |u, r| &u * &r.matrix(dim, t))
}

fn conjugate_diagonal(u: &CMatrix, diag: &[f64]) -> CMatrix {
    let d = CMatrix::from_real_diagonal(diag).expect("finite diagonal");
    (&(u * &d) * &u.adjoint()).hermitian_part()
}

/// Random smooth (ρ(t), H(t)) on [0, t_max]: both are conjugated diagonals under
/// products of complex plane rotations, with spectra that stay well separated.
pub fn random_smooth_trajectory<R: Rng>(
    rng: &mut R,
    dim: usize,
    t_max: f64,
    steps: usize,
) -> Result<Trajectory, crate::accounting::AccountingError> {
    let n_rot = 2 * dim;
    let h_rot: Vec<Rotation> = (0..n_rot).map(|_| Rotation::random(rng, dim)).collect();
    let r_rot: Vec<Rotation> = (0..n_rot).map(|_| Rotation::random(rng, dim)).collect();
    let levels: Vec<[f64; 3]> = (0..dim)
        .map(|_| {
            [
                rng.gen_range(-0.25..0.25),
                rng.gen_range(0.5..3.0),
                rng.gen_range(-PI..PI),
            ]
        })
        .collect();
    let logits: Vec<[f64; 3]> = (0..dim)
        .map(|_| {
            [
                rng.gen_range(-0.2..0.2),
                rng.gen_range(0.5..3.0),
                rng.gen_range(-PI..PI),
            ]
        })
        .collect();
    let offset = rng.gen_range(-1.0..1.0);

    let mut samples = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let t = t_max * i as f64 / steps as f64;
        let energies: Vec<f64> = levels
            .iter()
            .enumerate()
            .map(|(n, [amp, freq, ph])| offset + n as f64 + amp * (freq * t + ph).sin())
            .collect();
        let weights: Vec<f64> = logits
            .iter()
            .enumerate()
            .map(|(k, [amp, freq, ph])| (-(0.9 * k as f64 + amp * (freq * t + ph).sin())).exp())
            .collect();
        let z: f64 = weights.iter().sum();
        let weights: Vec<f64> = weights.iter().map(|w| w / z).collect();
        let h = Hamiltonian::new(conjugate_diagonal(&unitary(&h_rot, dim, t), &energies))?;
        let rho = DensityMatrix::new(conjugate_diagonal(&unitary(&r_rot, dim, t), &weights))?;
        samples.push(Sample::new(t, h, rho));
    }
    Trajectory::new(samples)
}
