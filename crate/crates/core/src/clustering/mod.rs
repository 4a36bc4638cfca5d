//! Clustering objectives, best responses, solvers and the comparison
//! quantities (optimality gaps, prototype displacement, drift).
//!
//! The objective of a pair `(C, theta)` is `sum_j sum_{i in C_j} g(d(x_i, theta_j))`,
//! summed in index order.

mod compare;
mod exact;
mod solvers;

pub use compare::{displacement, gaps, hausdorff_drift, GapReport, OptKind};
pub use exact::{
    brute_force_opt, enumerate_profiled, exact_1d_dp, exact_1d_dp_top2, profiled_objective, DpTop2,
    ENUMERATION_LIMIT,
};
pub use solvers::{kmedoids_swap, lloyd, lloyd_warm_start, LloydConfig};

use crate::error::{Error, Result};
use crate::geometry::{distance, Feasibility, Points, Prototypes};
use crate::loss::{LossKind, LossSpec};
use crate::partition::Partition;
use serde::{Deserialize, Serialize};

/// How trustworthy a reported optimum is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exactness {
    Heuristic,
    Exact,
    /// Exhaustive over partitions, but each partition's prototype was found
    /// by an iterative method (geometric median in `d >= 2`).
    ExactUpToProfilingTolerance,
}

/// One restart of a multi-start solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRun {
    pub partition: Partition,
    pub prototypes: Prototypes,
    pub objective: f64,
    pub iterations: usize,
    /// Objective after seeding and after every iteration.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub partition: Partition,
    pub prototypes: Prototypes,
    pub objective: f64,
    pub restarts_used: usize,
    pub per_restart_objectives: Vec<f64>,
    pub best_restart: usize,
    pub seed: u64,
    pub method: String,
    pub exactness: Exactness,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub runs: Vec<RestartRun>,
}

fn check_dims(points: &Points, partition: &Partition, protos: &Prototypes) -> Result<()> {
    if partition.n() != points.n() {
        return Err(Error::DimensionMismatch {
            expected: points.n(),
            got: partition.n(),
        });
    }
    if protos.d() != points.d() {
        return Err(Error::DimensionMismatch {
            expected: points.d(),
            got: protos.d(),
        });
    }
    if protos.k() != partition.k() {
        return Err(Error::DimensionMismatch {
            expected: partition.k(),
            got: protos.k(),
        });
    }
    Ok(())
}

/// `L_n(C, theta)`.
pub fn objective(
    points: &Points,
    partition: &Partition,
    protos: &Prototypes,
    loss: &LossSpec,
) -> Result<f64> {
    check_dims(points, partition, protos)?;
    let mut total = 0.0;
    for (x, &j) in points.rows().zip(partition.labels()) {
        total += loss.eval(distance(x, protos.get(j)))?;
    }
    Ok(total)
}

/// `sum_i g_i(d(x_i, theta_{c(i)}))` with one loss per point.
pub fn objective_per_point(
    points: &Points,
    partition: &Partition,
    protos: &Prototypes,
    losses: &[LossSpec],
) -> Result<f64> {
    check_dims(points, partition, protos)?;
    if losses.len() != points.n() {
        return Err(Error::DimensionMismatch {
            expected: points.n(),
            got: losses.len(),
        });
    }
    let mut total = 0.0;
    for ((x, &j), g) in points.rows().zip(partition.labels()).zip(losses) {
        total += g.eval(distance(x, protos.get(j)))?;
    }
    Ok(total)
}

/// Index of the nearest prototype, lowest index on ties.
pub fn nearest(x: &[f64], protos: &Prototypes) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for j in 0..protos.k() {
        let d = distance(x, protos.get(j));
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    best
}

/// Nearest-prototype (Voronoi) partition; optimal for any non-decreasing loss.
pub fn best_response_partition(points: &Points, protos: &Prototypes) -> Result<Partition> {
    if protos.d() != points.d() {
        return Err(Error::DimensionMismatch {
            expected: points.d(),
            got: protos.d(),
        });
    }
    Partition::new(
        points.rows().map(|x| nearest(x, protos)).collect(),
        protos.k(),
    )
}

/// Weiszfeld stopping rule: relative step below this value.
pub const WEISZFELD_TOL: f64 = 1e-10;
pub const WEISZFELD_MAX_ITERS: usize = 10_000;

fn centroid(points: &Points, members: &[usize]) -> Vec<f64> {
    let d = points.d();
    let mut c = vec![0.0; d];
    for &i in members {
        for (cj, xj) in c.iter_mut().zip(points.row(i)) {
            *cj += xj;
        }
    }
    let m = members.len() as f64;
    c.iter_mut().for_each(|v| *v /= m);
    c
}

fn lower_median_1d(points: &Points, members: &[usize]) -> f64 {
    let mut xs: Vec<f64> = members.iter().map(|&i| points.row(i)[0]).collect();
    xs.sort_by(|a, b| a.total_cmp(b));
    xs[(xs.len() - 1) / 2]
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Geometric median by Weiszfeld iteration from the centroid, with the
/// Vardi-Zhang step when the iterate lands on data points.
pub fn geometric_median(points: &Points, members: &[usize]) -> Vec<f64> {
    let d = points.d();
    let mut y = centroid(points, members);
    for _ in 0..WEISZFELD_MAX_ITERS {
        let mut num = vec![0.0; d];
        let mut den = 0.0;
        let mut coincident = 0usize;
        // pull = sum over non-coincident points of (x - y)/|x - y|
        let mut pull = vec![0.0; d];
        for &i in members {
            let x = points.row(i);
            let r = distance(x, &y);
            if r <= 1e-14 * (1.0 + norm(&y)) {
                coincident += 1;
                continue;
            }
            for t in 0..d {
                num[t] += x[t] / r;
                pull[t] += (x[t] - y[t]) / r;
            }
            den += 1.0 / r;
        }
        if den == 0.0 {
            break;
        }
        let next: Vec<f64> = if coincident == 0 {
            num.iter().map(|v| v / den).collect()
        } else {
            // subgradient check: y is optimal iff |pull| <= multiplicity
            let r_pull = norm(&pull);
            if r_pull <= coincident as f64 {
                break;
            }
            let t_y: Vec<f64> = num.iter().map(|v| v / den).collect();
            let w = coincident as f64 / r_pull;
            t_y.iter()
                .zip(&y)
                .map(|(t, yy)| (1.0 - w) * t + w * yy)
                .collect()
        };
        let step = distance(&next, &y);
        y = next;
        if step <= WEISZFELD_TOL * norm(&y).max(1.0) {
            break;
        }
    }
    y
}

/// Minimizer of `sum_i huber_tau(|x_i - y|)` by iteratively reweighted means.
fn huber_center(points: &Points, members: &[usize], tau: f64) -> Vec<f64> {
    let d = points.d();
    let mut y = centroid(points, members);
    for _ in 0..WEISZFELD_MAX_ITERS {
        let mut num = vec![0.0; d];
        let mut den = 0.0;
        for &i in members {
            let x = points.row(i);
            let r = distance(x, &y);
            let w = if r <= tau { 1.0 } else { tau / r };
            for t in 0..d {
                num[t] += w * x[t];
            }
            den += w;
        }
        let next: Vec<f64> = num.iter().map(|v| v / den).collect();
        let step = distance(&next, &y);
        y = next;
        if step <= 1e-12 * norm(&y).max(1.0) {
            break;
        }
    }
    y
}

/// Cost of serving `members` from location `y`.
pub(crate) fn cluster_cost(
    points: &Points,
    members: &[usize],
    y: &[f64],
    loss: &LossSpec,
) -> Result<f64> {
    let mut total = 0.0;
    for &i in members {
        total += loss.eval(distance(points.row(i), y))?;
    }
    Ok(total)
}

/// Best data point (over the whole dataset) for serving `members`; lowest
/// index on ties.
fn best_medoid(points: &Points, members: &[usize], loss: &LossSpec) -> Result<usize> {
    let mut best = 0;
    let mut best_cost = f64::INFINITY;
    for c in 0..points.n() {
        let cost = cluster_cost(points, members, points.row(c), loss)?;
        if cost < best_cost {
            best_cost = cost;
            best = c;
        }
    }
    Ok(best)
}

/// Optimal single prototype for one cluster under free feasibility.
pub(crate) fn free_center(points: &Points, members: &[usize], loss: &LossSpec) -> Result<Vec<f64>> {
    match &loss.kind {
        LossKind::Squared => Ok(centroid(points, members)),
        LossKind::Linear if points.d() == 1 => Ok(vec![lower_median_1d(points, members)]),
        LossKind::Linear => Ok(geometric_median(points, members)),
        LossKind::Huber { tau } => Ok(huber_center(points, members, *tau)),
        LossKind::Tabulated(_) => Err(Error::Unsupported(
            "free prototypes have no best response for tabulated losses; use data-restricted prototypes"
                .into(),
        )),
    }
}

/// Best-response prototypes for a partition with nonempty clusters.
pub fn best_response_prototypes(
    points: &Points,
    partition: &Partition,
    loss: &LossSpec,
    feasibility: Feasibility,
) -> Result<Prototypes> {
    if partition.n() != points.n() {
        return Err(Error::DimensionMismatch {
            expected: points.n(),
            got: partition.n(),
        });
    }
    partition.require_nonempty()?;
    let clusters = partition.clusters();
    match feasibility {
        Feasibility::Free => {
            let rows = clusters
                .iter()
                .map(|m| free_center(points, m, loss))
                .collect::<Result<Vec<_>>>()?;
            Prototypes::from_rows(&rows)
        }
        Feasibility::DataRestricted => {
            let idx = clusters
                .iter()
                .map(|m| best_medoid(points, m, loss))
                .collect::<Result<Vec<_>>>()?;
            Ok(Prototypes::medoids(points, &idx))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(xs: &[f64]) -> Points {
        Points::from_1d(xs).unwrap()
    }

    #[test]
    fn objective_examples() {
        let x = pts(&[0.0, 0.1, 10.0, 10.1]);
        let c = Partition::new(vec![0, 0, 1, 1], 2).unwrap();
        let means = Prototypes::from_1d(&[0.05, 10.05]).unwrap();
        let v = objective(&x, &c, &means, &LossSpec::squared()).unwrap();
        assert!((v - 0.01).abs() < 1e-12);
        let v = objective(&x, &c, &means, &LossSpec::linear()).unwrap();
        assert!((v - 0.2).abs() < 1e-12);
        let at = Prototypes::from_1d(&[0.0, 10.0]).unwrap();
        let same = pts(&[0.0, 0.0, 10.0]);
        let c3 = Partition::new(vec![0, 0, 1], 2).unwrap();
        assert_eq!(
            objective(&same, &c3, &at, &LossSpec::squared()).unwrap(),
            0.0
        );
    }

    #[test]
    fn voronoi_ties_go_to_lowest_index() {
        let p = best_response_partition(&pts(&[1.0]), &Prototypes::from_1d(&[0.0, 2.0]).unwrap())
            .unwrap();
        assert_eq!(p.labels(), &[0]);
    }

    #[test]
    fn best_response_examples() {
        let one = Partition::new(vec![0, 0], 1).unwrap();
        let p = best_response_prototypes(
            &pts(&[0.0, 0.1]),
            &one,
            &LossSpec::squared(),
            Feasibility::Free,
        )
        .unwrap();
        assert!((p.get(0)[0] - 0.05).abs() < 1e-15);
        let three = Partition::new(vec![0, 0, 0], 1).unwrap();
        let x = pts(&[0.0, 1.0, 10.0]);
        let p =
            best_response_prototypes(&x, &three, &LossSpec::linear(), Feasibility::Free).unwrap();
        assert_eq!(p.get(0), &[1.0]);
        let p =
            best_response_prototypes(&x, &three, &LossSpec::linear(), Feasibility::DataRestricted)
                .unwrap();
        assert_eq!(p.medoid_indices, Some(vec![1]));
        let even = Partition::new(vec![0; 4], 1).unwrap();
        let p = best_response_prototypes(
            &pts(&[4.0, 1.0, 3.0, 2.0]),
            &even,
            &LossSpec::linear(),
            Feasibility::Free,
        )
        .unwrap();
        assert_eq!(p.get(0), &[2.0]);
    }

    #[test]
    fn empty_cluster_is_rejected() {
        let c = Partition::new(vec![0, 0], 2).unwrap();
        let r = best_response_prototypes(
            &pts(&[0.0, 1.0]),
            &c,
            &LossSpec::squared(),
            Feasibility::Free,
        );
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn weiszfeld_on_symmetric_configurations() {
        // equilateral triangle: Fermat point is the center
        let s3 = 3f64.sqrt();
        let tri = Points::from_rows(&[vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, s3]]).unwrap();
        let m = geometric_median(&tri, &[0, 1, 2]);
        assert!((m[0] - 1.0).abs() < 1e-8 && (m[1] - s3 / 3.0).abs() < 1e-8);
        // majority at one location: median is that location
        let heavy = Points::from_rows(&[
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![5.0, 0.0],
            vec![0.0, 5.0],
        ])
        .unwrap();
        let m = geometric_median(&heavy, &[0, 1, 2, 3, 4]);
        assert!(norm(&m) < 1e-9, "{m:?}");
    }

    #[test]
    fn huber_center_is_robust() {
        let x = pts(&[0.0, 0.0, 0.0, 100.0]);
        let c = huber_center(&x, &[0, 1, 2, 3], 1.0);
        // stationarity: 3 * (0 - y) + tau = 0 when the outlier is beyond tau
        assert!((c[0] - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn tabulated_free_prototypes_unsupported() {
        let t = crate::loss::Table::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        let c = Partition::new(vec![0], 1).unwrap();
        let r =
            best_response_prototypes(&pts(&[0.5]), &c, &LossSpec::tabulated(t), Feasibility::Free);
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }
}
