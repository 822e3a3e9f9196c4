use std::f64::consts::PI;

use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use firstlaw::accounting::{
    analyze, resolve_all, step_increment, Sample, TrackedSample, Trajectory,
};
use firstlaw::channels::{ad_closed_form, amplitude_damping_kraus, iterate_channel, DecayParams};
use firstlaw::linalg::{hermitian_eig, CMatrix, Complex64};
use firstlaw::qstate::{
    free_energy, gibbs_state, internal_energy, overlap_matrix, von_neumann_entropy, DensityMatrix,
    Hamiltonian, ThermalParams,
};
use firstlaw::verification::{random_hermitian, random_smooth_trajectory};

fn random_state(seed: u64, dim: usize) -> DensityMatrix {
    // ρ = A A† / tr(A A†)
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_hermitian(&mut rng, dim);
    let b = random_hermitian(&mut rng, dim);
    let m = &a
        + &CMatrix::new(
            dim,
            b.as_slice().iter().map(|z| z * Complex64::i()).collect(),
        )
        .unwrap();
    let p = &m * &m.adjoint();
    let tr = p.trace().re;
    DensityMatrix::new(p.scale(1.0 / tr).hermitian_part()).unwrap()
}

fn random_unitary(seed: u64, dim: usize) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = hermitian_eig(&random_hermitian(&mut rng, dim)).unwrap();
    let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (j, v) in d.vectors().iter().enumerate() {
        for i in 0..dim {
            data[i * dim + j] = v[i];
        }
    }
    CMatrix::new(dim, data).unwrap()
}

fn rephase(sample: &Sample, t: &TrackedSample, phases: &[f64]) -> TrackedSample {
    let mut out = t.clone();
    out.energy_basis = t.energy_basis.with_phases(phases);
    out.state_basis = t
        .state_basis
        .with_phases(&phases.iter().map(|p| 0.7 * p + 1.0).collect::<Vec<_>>());
    out.overlap = overlap_matrix(&out.energy_basis, &out.state_basis).unwrap();
    let (h, rho) = (sample.hamiltonian.matrix(), sample.rho.matrix());
    out.populations = out
        .energy_basis
        .vectors_by_branch()
        .iter()
        .map(|n| rho.sandwich(n, n).re)
        .collect();
    out.diagonal_energies = out
        .state_basis
        .vectors_by_branch()
        .iter()
        .map(|k| h.sandwich(k, k).re)
        .collect();
    out
}

fn diagonal_trajectory(seed: u64, dim: usize, steps: usize) -> Trajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    use rand::Rng;
    let freqs: Vec<(f64, f64)> = (0..dim)
        .map(|_| (rng.gen_range(0.5..3.0), rng.gen_range(-PI..PI)))
        .collect();
    let samples = (0..=steps)
        .map(|i| {
            let t = i as f64 / steps as f64;
            let levels: Vec<f64> = (0..dim)
                .map(|n| n as f64 + 0.3 * (freqs[n].0 * t + freqs[n].1).sin())
                .collect();
            let w: Vec<f64> = (0..dim)
                .map(|k| (-(0.8 * k as f64) + 0.1 * (freqs[k].0 * t).cos()).exp())
                .collect();
            let z: f64 = w.iter().sum();
            let p: Vec<f64> = w.iter().map(|x| x / z).collect();
            Sample::new(
                t,
                Hamiltonian::diagonal(&levels).unwrap(),
                DensityMatrix::diagonal(&p).unwrap(),
            )
        })
        .collect();
    Trajectory::new(samples).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigenvector_phases_do_not_change_increments(seed in any::<u64>(), dim in 2usize..=4, a in -PI..PI, b in -PI..PI) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let traj = random_smooth_trajectory(&mut rng, dim, 0.1, 2).unwrap();
        let (tracked, _) = resolve_all(&traj).unwrap();
        let s = traj.samples();
        let phases: Vec<f64> = (0..dim).map(|i| a + b * i as f64).collect();
        let x = step_increment(&tracked[0], &tracked[1]);
        let y = step_increment(&rephase(&s[0], &tracked[0], &phases), &rephase(&s[1], &tracked[1], &phases));
        for (u, v) in [(x.dw, y.dw), (x.dq_cal, y.dq_cal), (x.dc, y.dc), (x.dw_cl, y.dw_cl),
                       (x.dq_cl, y.dq_cl), (x.dw_cal, y.dw_cal), (x.residual, y.residual)] {
            prop_assert!((u - v).abs() < 1e-13, "{u} vs {v}");
        }
    }

    #[test]
    fn free_energy_is_u_minus_ts(seed in any::<u64>(), dim in 2usize..=6, temperature in 0.05f64..20.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = Hamiltonian::new(random_hermitian(&mut rng, dim)).unwrap();
        let th = ThermalParams::new(temperature).unwrap();
        let rho = gibbs_state(&h, th).unwrap();
        let f = free_energy(&h, th).unwrap();
        let u = internal_energy(&rho, &h).unwrap();
        let s = von_neumann_entropy(&rho).unwrap();
        prop_assert!((f - (u - temperature * s)).abs() < 1e-10 * (1.0 + f.abs()));
    }

    #[test]
    fn entropy_is_unitarily_invariant(seed in any::<u64>(), dim in 2usize..=6) {
        let rho = random_state(seed, dim);
        let v = random_unitary(seed ^ 0x5555, dim);
        let rotated = DensityMatrix::new((&(&v * rho.matrix()) * &v.adjoint()).hermitian_part()).unwrap();
        let (s0, s1) = (von_neumann_entropy(&rho).unwrap(), von_neumann_entropy(&rotated).unwrap());
        prop_assert!((s0 - s1).abs() < 1e-10);
        prop_assert!(s0 >= 0.0 && s0 <= (dim as f64).ln() + 1e-12);
    }

    #[test]
    fn overlap_is_doubly_stochastic(seed in any::<u64>(), dim in 2usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = Hamiltonian::new(random_hermitian(&mut rng, dim)).unwrap();
        let rho = random_state(seed.wrapping_add(1), dim);
        let w = overlap_matrix(&h.eig().unwrap(), &rho.eig().unwrap()).unwrap();
        prop_assert!(w.stochastic_defect() < 1e-12);
        prop_assert!(w.rows().iter().flatten().all(|&x| (0.0..=1.0 + 1e-12).contains(&x)));
    }

    #[test]
    fn decay_composes_as_a_semigroup(seed in any::<u64>(), gamma in 0.0f64..3.0, t1 in 0.0f64..4.0, t2 in 0.0f64..4.0) {
        let rho = random_state(seed, 2);
        let dp = DecayParams::new(gamma).unwrap();
        let two_steps = ad_closed_form(&ad_closed_form(&rho, dp, t1).unwrap(), dp, t2).unwrap();
        let one_step = ad_closed_form(&rho, dp, t1 + t2).unwrap();
        prop_assert!(two_steps.matrix().distance(one_step.matrix()).unwrap() < 1e-14);
        prop_assert!((one_step.matrix().trace().re - 1.0).abs() < 1e-14);
        prop_assert!(one_step.eig().unwrap().values()[0] > -1e-14);
    }

    #[test]
    fn kraus_maps_compose_multiplicatively(seed in any::<u64>(), p in 0.0f64..1.0, q in 0.0f64..1.0) {
        // damping by p then q equals damping by 1 − (1 − p)(1 − q)
        let rho = random_state(seed, 2);
        let a = amplitude_damping_kraus(p).unwrap();
        let b = amplitude_damping_kraus(q).unwrap();
        let c = amplitude_damping_kraus(1.0 - (1.0 - p) * (1.0 - q)).unwrap();
        let lhs = b.apply(&a.apply(&rho).unwrap()).unwrap();
        let rhs = c.apply(&rho).unwrap();
        prop_assert!(lhs.matrix().distance(rhs.matrix()).unwrap() < 1e-14);
    }

    // step probability Γt/n stays at or below 1
    #[test]
    fn iterated_channel_trace_and_positivity(seed in any::<u64>(), n in 5usize..200, t in 0.0f64..5.0) {
        let rho = random_state(seed, 2);
        let out = iterate_channel(&rho, DecayParams::new(1.0).unwrap(), t, n).unwrap();
        prop_assert!((out.matrix().trace().re - 1.0).abs() < 1e-12);
        prop_assert!(out.eig().unwrap().values()[0] > -1e-12);
    }

    #[test]
    fn time_reversal_negates_cumulative_columns(seed in any::<u64>(), dim in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let traj = random_smooth_trajectory(&mut rng, dim, 1.0, 60).unwrap();
        let fwd = analyze(&traj).unwrap();
        let rev = analyze(&traj.time_reversed()).unwrap();
        let n = fwd.rows().len() - 1;
        let end = *fwd.last();
        for (j, r) in rev.rows().iter().enumerate() {
            let f = fwd.rows()[n - j];
            for (x, y) in [(r.w, f.w - end.w), (r.q_cal, f.q_cal - end.q_cal), (r.c, f.c - end.c),
                           (r.w_cl, f.w_cl - end.w_cl), (r.q_cl, f.q_cl - end.q_cl), (r.w_cal, f.w_cal - end.w_cal)] {
                prop_assert!((x - y).abs() < 1e-12, "{x} vs {y}");
            }
            prop_assert!((r.u - f.u).abs() < 1e-15);
        }
    }

    #[test]
    fn branch_labels_are_stable_under_refinement(seed in any::<u64>(), dim in 2usize..=4) {
        let coarse = random_smooth_trajectory(&mut ChaCha8Rng::seed_from_u64(seed), dim, 1.0, 50).unwrap();
        let fine = random_smooth_trajectory(&mut ChaCha8Rng::seed_from_u64(seed), dim, 1.0, 100).unwrap();
        let (a, _) = resolve_all(&coarse).unwrap();
        let (b, _) = resolve_all(&fine).unwrap();
        for (i, x) in a.iter().enumerate() {
            prop_assert_eq!(x.state_basis.labels(), b[2 * i].state_basis.labels());
            prop_assert_eq!(x.energy_basis.labels(), b[2 * i].energy_basis.labels());
        }
    }

    #[test]
    fn diagonal_trajectories_carry_no_coherence_energy(seed in any::<u64>(), dim in 2usize..=5) {
        let ledger = analyze(&diagonal_trajectory(seed, dim, 80)).unwrap();
        for r in ledger.rows() {
            prop_assert_eq!(r.c, 0.0);
            prop_assert_eq!(r.l1_coherence, 0.0);
            prop_assert!((r.w_cal - r.w_cl).abs() < 1e-15 && (r.q_cl - r.q_cal).abs() < 1e-15);
        }
    }
}
