use clustercert::certify::{
    condition_number, condition_number_bound, eta_bound_kmeans, global_bound, hamming_tube_bound,
    heterogeneous_bound, local_core_bound, tracking_bound, tree_bound, BoundInputs, TrackingInputs,
    TreeLevel, TubeInputs,
};
use clustercert::clustering::{
    brute_force_opt, displacement, exact_1d_dp, hausdorff_drift, kmedoids_swap, lloyd, objective,
    LloydConfig,
};
use clustercert::geometry::{core_belt, summarize_geometry};
use clustercert::partition::{align, misclassification_rate};
use clustercert::{Feasibility, Instance, LossSpec, Partition, Points, Prototypes};

const EPS: f64 = 1e-12;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= EPS * b.abs().max(1.0)
}

fn four_points() -> Points {
    Points::from_1d(&[0.0, 0.1, 10.0, 10.1]).unwrap()
}

fn inputs(opt_n: f64, n: usize, gamma: f64, d_eff: f64, eta: f64, delta: f64) -> BoundInputs {
    BoundInputs {
        opt_n,
        n,
        gamma,
        d_eff,
        delta0: gamma + 2.0 * d_eff,
        eta,
        delta,
        delta_approx: 0.0,
    }
}

#[test]
fn loss_values() {
    let huber = LossSpec::huber(1.0).unwrap();
    assert_eq!(LossSpec::squared().eval(3.0).unwrap(), 9.0);
    assert_eq!(huber.eval(0.5).unwrap(), 0.125);
    assert_eq!(huber.eval(2.0).unwrap(), 1.5);
}

#[test]
fn increments_and_lipschitz_constants() {
    let huber = LossSpec::huber(1.0).unwrap();
    assert!(close(LossSpec::squared().increment(2.0, 5.0).unwrap(), 4.0));
    assert!(close(
        LossSpec::linear().increment(0.7, 100.0).unwrap(),
        0.7
    ));
    assert!(close(huber.increment(0.5, 10.0).unwrap(), 0.125));
    for g in [LossSpec::squared(), LossSpec::linear(), huber.clone()] {
        assert_eq!(g.increment(0.0, 5.0).unwrap(), 0.0);
    }
    assert_eq!(LossSpec::squared().lipschitz_bound(5.0).unwrap(), 10.0);
    assert_eq!(LossSpec::linear().lipschitz_bound(100.0).unwrap(), 1.0);
    assert_eq!(huber.lipschitz_bound(10.0).unwrap(), 1.0);
}

#[test]
fn misclassification_of_one_point() {
    let star = Partition::from_one_based(&[1, 1, 2, 2]).unwrap();
    let hat = Partition::from_one_based(&[1, 2, 2, 2]).unwrap();
    assert_eq!(misclassification_rate(&hat, &star).unwrap().0, 0.25);
    let swapped = Partition::from_one_based(&[2, 2, 1, 1]).unwrap();
    assert_eq!(misclassification_rate(&swapped, &star).unwrap().0, 0.0);
    assert_eq!(align(&swapped, &star).unwrap(), star);
}

#[test]
fn benchmark_objectives_on_two_pairs() {
    let pts = four_points();
    let part = Partition::new(vec![0, 0, 1, 1], 2).unwrap();
    let centroids = Prototypes::from_1d(&[0.05, 10.05]).unwrap();
    let sq = objective(&pts, &part, &centroids, &LossSpec::squared()).unwrap();
    assert!(close(sq, 0.01));
    let lin = objective(&pts, &part, &centroids, &LossSpec::linear()).unwrap();
    assert!(close(lin, 0.2));
}

#[test]
fn exact_optimum_on_two_pairs() {
    let pts = four_points();
    let sq = LossSpec::squared();
    let free = brute_force_opt(&pts, 2, &sq, Feasibility::Free).unwrap();
    assert!(close(free.objective, 0.01));
    assert_eq!(free.partition.labels(), &[0, 0, 1, 1]);
    assert!(close(exact_1d_dp(&pts, 2, &sq).unwrap().objective, 0.01));
    let restricted = brute_force_opt(&pts, 2, &sq, Feasibility::DataRestricted).unwrap();
    assert!(close(restricted.objective, 0.02));
    assert_eq!(
        brute_force_opt(&pts, 4, &sq, Feasibility::Free)
            .unwrap()
            .objective,
        0.0
    );
}

#[test]
fn lloyd_contract_on_two_pairs() {
    let pts = four_points();
    let cfg = LloydConfig {
        restarts: 8,
        seed: 3,
        ..Default::default()
    };
    let r = lloyd(&pts, 2, &LossSpec::squared(), &cfg).unwrap();
    assert_eq!(r.per_restart_objectives.len(), 8);
    let min = r
        .per_restart_objectives
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    assert_eq!(min, r.objective);
    assert!(close(r.objective, 0.01));
}

#[test]
fn medoid_of_a_skewed_triple() {
    let pts = Points::from_1d(&[0.0, 1.0, 10.0]).unwrap();
    let r = kmedoids_swap(&pts, 1, &LossSpec::linear(), &LloydConfig::default()).unwrap();
    assert_eq!(r.prototypes.get(0), &[1.0]);
    assert_eq!(r.objective, 10.0);
}

#[test]
fn displacement_and_drift() {
    let hat = Prototypes::from_1d(&[0.0, 10.0]).unwrap();
    let star = Prototypes::from_1d(&[10.5, 0.2]).unwrap();
    let (eta, perm) = displacement(&hat, &star).unwrap();
    assert!(close(eta, 0.5));
    assert_eq!(perm, vec![1, 0]);
    let a = Prototypes::from_1d(&[0.0, 10.0]).unwrap();
    let b = Prototypes::from_1d(&[1.0, 10.0]).unwrap();
    assert_eq!(hausdorff_drift(&a, &b).unwrap(), 1.0);
}

#[test]
fn core_of_a_one_dimensional_cluster() {
    let inst = Instance::with_benchmark(
        Points::from_1d(&[0.0, 0.5, 1.0, 10.0]).unwrap(),
        Partition::new(vec![0, 0, 0, 1], 2).unwrap(),
        Prototypes::from_1d(&[0.0, 10.0]).unwrap(),
    )
    .unwrap();
    let cb = core_belt(&inst, 0.6).unwrap();
    assert_eq!(cb.core_indices, vec![0, 3]);
    assert_eq!(cb.belt_indices, vec![1, 2]);
    let geo = summarize_geometry(&inst).unwrap();
    assert_eq!(geo.d_eff, 1.0);
    assert_eq!(geo.gamma, 8.0);
}

#[test]
fn condition_numbers() {
    let cn = |g: &LossSpec, gamma, d| condition_number(g, gamma, d).unwrap().value;
    assert!(close(cn(&LossSpec::squared(), 1.0, 2.0), 4.0));
    assert!(close(cn(&LossSpec::linear(), 1.0, 2.0), 2.0));
    assert!(close(cn(&LossSpec::huber(2.0).unwrap(), 0.5, 1.0), 4.0));
    assert_eq!(cn(&LossSpec::squared(), 0.0, 2.0), f64::INFINITY);
}

#[test]
fn global_bound_arithmetic() {
    let c = global_bound(&LossSpec::squared(), &inputs(1.0, 1, 2.0, 1.0, 0.0, 0.04)).unwrap();
    assert!(close(c.bound_total, 0.01));
    let vac = global_bound(&LossSpec::squared(), &inputs(1.0, 1, 2.0, 1.0, 2.0, 0.0)).unwrap();
    assert!(vac.vacuous);
    let zero = global_bound(&LossSpec::squared(), &inputs(1.0, 10, 2.0, 1.0, 0.0, 0.0)).unwrap();
    assert_eq!(zero.bound_total, 0.0);
    assert!(close(condition_number_bound(4.0, 0.01, 0.0, 0.0), 0.04));
    assert_eq!(
        condition_number_bound(f64::INFINITY, 0.01, 0.0, 0.0),
        f64::INFINITY
    );
}

#[test]
fn local_bound_deepens_the_margin() {
    let g = LossSpec::squared();
    let base = inputs(1.0, 10, 1.0, 2.0, 0.0, 0.1);
    let at_zero = local_core_bound(&g, &base, 0.0).unwrap();
    let global = global_bound(&g, &base).unwrap();
    assert_eq!(at_zero.bound_total, global.bound_total);
    let deep = local_core_bound(&g, &base, 0.5).unwrap();
    assert!(close(deep.effective_increment, 4.0));
}

#[test]
fn kmeans_displacement_bound() {
    assert!(close(
        eta_bound_kmeans(1.0, 0.5, 1.0, 0.02, 0.0).unwrap(),
        0.2
    ));
    assert_eq!(eta_bound_kmeans(1.0, 0.5, 1.0, 0.0, 0.0).unwrap(), 0.0);
}

#[test]
fn tube_bound_doubles_the_optimization_term() {
    let g = LossSpec::squared();
    let base = inputs(0.5, 10, 2.0, 1.0, 0.0, 0.03);
    let single = global_bound(&g, &base).unwrap();
    let tube = hamming_tube_bound(
        &g,
        &TubeInputs {
            opt_n: base.opt_n,
            n: base.n,
            gamma: base.gamma,
            d_eff: base.d_eff,
            delta0: base.delta0,
            delta_approx: 0.0,
            delta1: 0.03,
            delta2: 0.03,
            eta1: 0.0,
            eta2: 0.0,
        },
    )
    .unwrap();
    assert!(close(tube.bound, 2.0 * single.bound_optimization_term));
}

#[test]
fn heterogeneous_bound_collapses_for_identical_losses() {
    let g = LossSpec::linear();
    let base = inputs(0.7, 6, 1.5, 1.0, 0.2, 0.05);
    let (het, _) = heterogeneous_bound(&vec![g.clone(); 6], &base).unwrap();
    assert_eq!(
        het.bound_total,
        global_bound(&g, &base).unwrap().bound_total
    );
}

#[test]
fn tree_bound_sums_levels() {
    let level = |kappa, delta| TreeLevel {
        kappa,
        delta,
        gamma: None,
        d: None,
    };
    assert!(close(tree_bound(&[level(4.0, 0.01)], None).bound, 0.04));
    assert!(close(
        tree_bound(&[level(4.0, 0.01), level(2.0, 0.005)], None).bound,
        0.05
    ));
    assert_eq!(
        tree_bound(&[level(4.0, 0.0), level(2.0, 0.0)], None).bound,
        0.0
    );
}

#[test]
fn tracking_bound_at_unit_margin() {
    let t = tracking_bound(
        &LossSpec::squared(),
        &TrackingInputs {
            gamma_t: 2.0,
            d_t: 1.0,
            delta0_t: 4.0,
            eta_alg: 0.5,
            eta_drift: 0.5,
            delta_t: 0.0,
            delta_approx_t: 0.0,
            opt_per_point: 0.2,
        },
    )
    .unwrap();
    assert!(close(t.increment, 1.0));
    assert!(close(t.kappa_t, 1.0));
    assert!(!t.vacuous);
}
