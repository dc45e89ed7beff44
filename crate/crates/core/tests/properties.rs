use proptest::prelude::*;

use splitfix::analysis::{
    averaged_slack, check_fejer, empirical_rate_samples, fit_log_linear, rate_bound,
    subregularity_transfer, Provenance, RateCase, TransferInputs,
};
use splitfix::linalg::{Matrix, Rng, Vector};
use splitfix::operators::{project_l1_ball, prox_l1, Groups, NormOrder, ProxOperator};
use splitfix::problems::{random_instance, reference_solve, InstanceExtras, ProblemKind};
use splitfix::splitting::{Algorithm, AlgorithmConfig, RelaxationSchedule, StopRule, Termination};
use splitfix::suites::drs_identity_max;

fn vec_strategy(n: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-10.0f64..10.0, n).prop_map(Vector::from_vec)
}

fn toy(seed: u64, n: usize, mu: f64) -> splitfix::problems::ProblemInstance {
    let ex = InstanceExtras {
        mu,
        ..InstanceExtras::default()
    };
    random_instance(seed, ProblemKind::LinearMonotone, n, n, &ex).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn soft_threshold_is_firmly_nonexpansive(x in vec_strategy(5), y in vec_strategy(5), tau in 0.0f64..5.0) {
        let s = averaged_slack(&x, &y, &prox_l1(&x, tau), &prox_l1(&y, tau), 0.5);
        prop_assert!(s >= -1e-10);
    }

    #[test]
    fn l1_ball_projection_feasible_and_optimal(z in vec_strategy(6), r in 0.01f64..5.0) {
        let p = Vector::from_vec(project_l1_ball(z.as_slice(), r));
        prop_assert!(p.iter().map(|v| v.abs()).sum::<f64>() <= r * (1.0 + 1e-12) + 1e-12);
        // variational inequality against the signed vertices of the ball
        for i in 0..6 {
            for s in [-r, r] {
                let mut v = Vector::zeros(6);
                v[i] = s;
                prop_assert!((&z - &p).dot(&(v - &p)) <= 1e-9 * (1.0 + z.norm_squared()));
            }
        }
    }

    #[test]
    fn group_prox_resolvents_are_firmly_nonexpansive(
        x in vec_strategy(6), y in vec_strategy(6), gamma in 0.05f64..4.0, p in 0usize..3,
    ) {
        let order = [NormOrder::One, NormOrder::Two, NormOrder::Inf][p];
        let groups = Groups::new(6, vec![vec![0, 3], vec![1, 2, 4], vec![5]]).unwrap();
        let op = ProxOperator::group_lp(groups, vec![1.0, 2.0, 0.5], 0.8, order).unwrap();
        let s = averaged_slack(&x, &y, &op.resolvent(gamma, &x).unwrap(), &op.resolvent(gamma, &y).unwrap(), 0.5);
        prop_assert!(s >= -1e-10);
    }

    #[test]
    fn factor_is_nondecreasing_in_kappa(
        case in 0usize..7, gamma_u in 0.02f64..0.98, lam_u in 0.01f64..0.99,
        lip in 0.0f64..5.0, theta in 0.1f64..5.0, k1 in 0.0f64..50.0, dk in 0.0f64..50.0,
    ) {
        let case = RateCase::ALL[case];
        let gamma = if case.needs_cocoercivity() { 2.0 * theta * gamma_u } else { 10.0 * gamma_u };
        let lambda = case.relaxation_bound(gamma, Some(theta)) * lam_u;
        let f1 = rate_bound(case, gamma, k1, lambda, Some(lip), Some(theta)).unwrap();
        let f2 = rate_bound(case, gamma, k1 + dk, lambda, Some(lip), Some(theta)).unwrap();
        prop_assert!(f1.factor <= f2.factor);
        prop_assert!((0.0..=1.0).contains(&f1.factor));
        prop_assert!(!f1.clamped);
    }

    #[test]
    fn transfer_round_trip_never_shrinks_kappa(gamma in 0.01f64..10.0, kappa in 0.0f64..10.0, lip in 0.0f64..10.0) {
        let r = subregularity_transfer(Provenance::FToR, &TransferInputs::new(gamma, kappa).lipschitz(lip)).unwrap();
        let f = subregularity_transfer(Provenance::RToF, &TransferInputs::new(gamma, r.kappa)).unwrap();
        let expected = gamma + kappa * (1.0 + gamma * lip);
        prop_assert!((f.kappa - expected).abs() <= 1e-12 * expected);
        prop_assert!(f.kappa >= kappa);
    }

    #[test]
    fn geometric_sequences_fit_exactly(ratio in 0.05f64..0.999, start in 1e-3f64..1e3, len in 10usize..80) {
        let samples: Vec<f64> = (0..len).map(|k| start * ratio.powi(k as i32)).collect();
        let fit = empirical_rate_samples(&samples, 0).unwrap();
        prop_assert!((fit.rate - ratio).abs() <= 1e-12);
        prop_assert!((fit.r_squared - 1.0).abs() <= 1e-12);
        prop_assert_eq!(fit_log_linear(&samples).unwrap().window.len(), len);
    }

    #[test]
    fn fejer_inequality_holds_for_all_algorithms(seed in 0u64..1000, alg in 0usize..4, lam_u in 0.05f64..0.95) {
        let alg = [Algorithm::Gppa, Algorithm::Fbs, Algorithm::Drs, Algorithm::Dys][alg];
        let inst = toy(seed, 5, 0.5);
        let gamma = 0.8;
        let lambda = inst.averagedness(alg, gamma).map(|a| lam_u / a).unwrap();
        let z_star = inst.reference.clone().unwrap().z_star;
        let w_ref = inst.driving_fixed_point(alg, gamma, &z_star).unwrap();
        let cfg = AlgorithmConfig::new(gamma, RelaxationSchedule::Constant(lambda), StopRule::new(0.0, 60)).with_snapshots();
        let x0 = Rng::new(seed + 1).gaussian_vector(5) * 3.0;
        let trace = inst.run(alg, &cfg, &x0).unwrap();
        let report = check_fejer(&trace, &w_ref, inst.averagedness(alg, gamma).unwrap()).unwrap();
        prop_assert!(report.passed(), "{:?}", report.violations);
    }

    #[test]
    fn residuals_nonincreasing_for_unit_relaxation(seed in 0u64..1000, alg in 0usize..5) {
        let alg = Algorithm::ALL[alg];
        let inst = toy(seed, 6, 0.3);
        let cfg = AlgorithmConfig::new(0.9, RelaxationSchedule::Constant(1.0), StopRule::new(0.0, 80));
        let x0 = Rng::new(seed).gaussian_vector(6) * 4.0;
        let trace = inst.run(alg, &cfg, &x0).unwrap();
        let r: Vec<f64> = trace.residuals().collect();
        prop_assert!(r.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        prop_assert!(trace.records.len() <= 81);
    }

    #[test]
    fn converged_runs_meet_tolerance(seed in 0u64..1000, tol_exp in 4i32..12) {
        let inst = toy(seed, 4, 1.0);
        let tol = 10f64.powi(-tol_exp);
        let cfg = AlgorithmConfig::new(1.0, RelaxationSchedule::Vanishing { top: 2.0, c: 1.0 }, StopRule::new(tol, 10_000));
        let trace = inst.run(Algorithm::Drs, &cfg, &Vector::zeros(4)).unwrap();
        prop_assert_eq!(trace.termination, Termination::Converged);
        prop_assert!(trace.final_residual() <= tol);
    }

    #[test]
    fn instances_are_deterministic(seed in any::<u64>(), kind in 0usize..3, m in 1usize..8, n in 1usize..6) {
        let kind = [ProblemKind::L1L1, ProblemKind::Lasso, ProblemKind::LinearMonotone][kind];
        let ex = InstanceExtras::default();
        let a = random_instance(seed, kind, m, n, &ex).unwrap();
        let b = random_instance(seed, kind, m, n, &ex).unwrap();
        prop_assert_eq!(a.to_json(), b.to_json());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn lasso_references_verify_on_recomputation(seed in 0u64..10_000, m in 4usize..12, n in 1usize..6) {
        let inst = random_instance(seed, ProblemKind::Lasso, m, n, &InstanceExtras::default()).unwrap();
        let r = reference_solve(&inst, 1e-9).unwrap();
        prop_assert!(inst.optimality_residual(&r.z_star).unwrap() <= r.tol);
        prop_assert!((inst.optimality_residual(&r.z_star).unwrap() - r.residual).abs() <= 1e-15);
    }

    #[test]
    fn sign_enum_agrees_with_drs(seed in 0u64..10_000) {
        let inst = random_instance(seed, ProblemKind::Lasso, 8, 4, &InstanceExtras { reg: 0.3, ..InstanceExtras::default() }).unwrap();
        let r = reference_solve(&inst, 1e-9).unwrap();
        let cfg = AlgorithmConfig::new(1.0, RelaxationSchedule::Constant(1.0), StopRule::new(1e-13, 200_000));
        let trace = inst.run(Algorithm::Drs, &cfg, &Vector::zeros(4)).unwrap();
        prop_assert!((trace.solution_estimate() - &r.z_star).amax() <= 1e-8);
    }

    #[test]
    fn drs_identity_on_supported_instances(seed in 0u64..10_000, kind in 0usize..3, gamma in 0.1f64..5.0) {
        let kind = [ProblemKind::L1L1, ProblemKind::Lasso, ProblemKind::LinearMonotone][kind];
        let inst = random_instance(seed, kind, 6, 4, &InstanceExtras::default()).unwrap();
        prop_assert!(drs_identity_max(&inst, gamma, 100, seed).unwrap() <= 1e-10);
    }

    #[test]
    fn linear_reference_solves_exactly(seed in 0u64..10_000, n in 1usize..10) {
        let inst = toy(seed, n, 1.0);
        let r = inst.reference.clone().unwrap();
        let splitfix::problems::ProblemData::LinearMonotone { m, q } = &inst.data else { unreachable!() };
        prop_assert!((m * &r.z_star + q).norm() <= 1e-12 * (1.0 + q.norm()));
        prop_assert!((inst.kappa.unwrap() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn drs_and_dys_agree_bitwise_without_forward_part() {
    let inst = random_instance(2, ProblemKind::L1L1, 5, 4, &InstanceExtras::default()).unwrap();
    let s = inst.splitting(Algorithm::Drs).unwrap();
    let x0 = Rng::new(9).gaussian_vector(inst.dim());
    let cfg = AlgorithmConfig::new(
        0.6,
        RelaxationSchedule::Vanishing { top: 2.0, c: 0.5 },
        StopRule::new(0.0, 100),
    )
    .with_snapshots();
    let a = splitfix::drs_run(&s.a, &s.b, &cfg, &x0).unwrap();
    let b = splitfix::dys_run(
        &s.a,
        &s.b,
        &splitfix::ForwardOperator::zero(inst.dim()),
        &cfg,
        &x0,
    )
    .unwrap();
    assert!(splitfix::suites::bitwise_equal(&a, &b));
    let _ = Matrix::zeros(1, 1);
}
