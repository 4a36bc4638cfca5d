use clustercert::oracle::{
    bound_soundness_suite, core_belt_suite, eta_kmeans_suite, eta_medoid_suite,
    hamming_metric_fuzz, increment_closed_form_suite, kappa_identity_suite, tube_suite,
    SuiteConfig,
};
use clustercert::phase::{
    adversarial_case, cell_sizes, exact_recovery_check, generate_two_ball, merge_penalty_fuzz,
    merge_penalty_oracle, mixing_coefficient_check, mixing_coefficient_exhaustive, phase_sweep,
    threshold_kmeans, threshold_kmedian_1d, Layout, MergeIntervals, PhaseGrid, RecoverySolver,
    TwoBallConfig,
};
use clustercert::tracking::{run_tracking, DriftScenario};
use clustercert::LossSpec;

fn small() -> SuiteConfig {
    SuiteConfig {
        instances: 25,
        max_n: 8,
        seed: 7,
    }
}

#[test]
fn instance_suites_find_no_violations() {
    let cfg = small();
    for tally in [
        bound_soundness_suite(&cfg).unwrap(),
        core_belt_suite(&cfg).unwrap(),
        eta_kmeans_suite(&cfg).unwrap(),
        eta_medoid_suite(&cfg).unwrap(),
        tube_suite(&cfg).unwrap(),
    ] {
        assert!(
            tally.passed(),
            "{}: {:?}",
            tally.name,
            tally.first_violation
        );
        assert!(tally.cases > 0, "{} checked nothing", tally.name);
    }
}

#[test]
fn closed_form_suites_find_no_violations() {
    for tally in [
        increment_closed_form_suite(100, 10_000, 1).unwrap(),
        kappa_identity_suite(200, 2).unwrap(),
        hamming_metric_fuzz(1000, 3).unwrap(),
        merge_penalty_fuzz(200, 4).unwrap(),
        mixing_coefficient_exhaustive(10).unwrap(),
    ] {
        assert!(
            tally.passed(),
            "{}: {:?}",
            tally.name,
            tally.first_violation
        );
    }
}

#[test]
fn suites_are_deterministic() {
    let cfg = small();
    assert_eq!(
        bound_soundness_suite(&cfg).unwrap(),
        bound_soundness_suite(&cfg).unwrap()
    );
}

#[test]
fn adversarial_layout_and_split() {
    let inst = generate_two_ball(&TwoBallConfig {
        n1: 4,
        n2: 36,
        radius: 1.0,
        delta: 3.9,
        layout: Layout::PointmassAdversarial,
    })
    .unwrap();
    let xs: Vec<f64> = inst.points.rows().map(|r| r[0]).collect();
    assert_eq!(xs.iter().filter(|&&x| x == 0.0).count(), 4);
    assert_eq!(xs.iter().filter(|&&x| (x - 2.9).abs() < 1e-12).count(), 18);
    assert_eq!(xs.iter().filter(|&&x| (x - 4.9).abs() < 1e-12).count(), 18);

    let case = adversarial_case(4, 36, 1.0, 3.9, &LossSpec::squared()).unwrap();
    assert!((case.split_cost - 33.64).abs() < 1e-9);
    assert!((case.correct_cost - 36.0).abs() < 1e-9);
    assert!(!case.recovered);
    assert!(case.consistent());
}

#[test]
fn collinear_recovery_right_of_both_thresholds() {
    assert_eq!(threshold_kmeans(0.25).unwrap(), 6.0);
    assert_eq!(threshold_kmedian_1d(0.25).unwrap(), 6.0);
    let (n1, n2) = cell_sizes(40, 0.25, Layout::Collinear1d).unwrap();
    let inst = generate_two_ball(&TwoBallConfig {
        n1,
        n2,
        radius: 1.0,
        delta: 6.5,
        layout: Layout::Collinear1d,
    })
    .unwrap();
    for g in [LossSpec::squared(), LossSpec::linear()] {
        assert!(
            exact_recovery_check(&inst, &g, RecoverySolver::Exact1dDp)
                .unwrap()
                .recovered
        );
    }
}

#[test]
fn coarse_sweep_has_no_sufficiency_violations() {
    let grid = PhaseGrid {
        ratios: vec![2.5, 4.0, 6.5, 9.0],
        balances: vec![0.1, 0.25, 0.5],
        ..Default::default()
    };
    for g in [LossSpec::squared(), LossSpec::linear()] {
        let sweep = phase_sweep(&grid, &g, Layout::Collinear1d).unwrap();
        assert_eq!(sweep.cells.len(), 12);
        assert!(sweep.sufficiency_violations.is_empty());
    }
}

#[test]
fn merge_and_mixing_examples() {
    let iv = MergeIntervals {
        u1: 0.0,
        u2: 4.0,
        radius: 1.0,
    };
    let m = merge_penalty_oracle(&[0.0], &[4.0], iv).unwrap();
    assert_eq!((m.lhs, m.rhs, m.holds), (4.0, 2.0, true));
    let mix = mixing_coefficient_check(2, 6, 0, 2).unwrap();
    assert_eq!((mix.psi, mix.lower), (1.0, 0.5));
}

#[test]
fn slow_drift_stays_within_bound() {
    let logs = run_tracking(&DriftScenario::slow_drift()).unwrap();
    assert_eq!(logs.len(), 20);
    for l in &logs {
        assert!(l.triangle_holds, "step {}", l.t);
        assert!(l.vacuous || l.p_t <= l.bound_t, "step {}", l.t);
        assert!(l.warm_objective >= l.opt_value - 1e-9);
    }
}
