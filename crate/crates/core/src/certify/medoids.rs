//! Zero-displacement certificate for data-restricted prototypes.

use crate::clustering::{best_response_partition, objective, ENUMERATION_LIMIT};
use crate::combinatorics::for_each_subset;
use crate::error::{domain, Error, Result};
use crate::geometry::{Points, Prototypes};
use crate::loss::LossSpec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedoidEtaReport {
    /// `(delta + delta_approx) OPT_n < Delta_min` and the benchmark tuple is
    /// the only one attaining its value.
    pub eta_zero: bool,
    /// `(delta + delta_approx) OPT_n < Delta_min` alone, with the value tie
    /// tolerance as margin.
    pub gap_condition: bool,
    /// `min |V(theta) - V(theta*)|` over tuples with a different value.
    #[serde(with = "crate::real")]
    pub delta_min: f64,
    pub threshold_lhs: f64,
    pub v_star: f64,
    pub opt_value: f64,
    /// Another tuple (at different locations) attains `V(theta*)`.
    pub uniqueness_violated: bool,
    /// Number of tuples, including the benchmark, attaining `V(theta*)`.
    pub co_optimal_tuples: usize,
}

/// Relative tolerance under which two profiled values count as equal.
pub const VALUE_TIE_TOLERANCE: f64 = 1e-9;

fn sorted_locations(p: &Prototypes) -> Vec<Vec<f64>> {
    let mut rows = p.points.to_rows();
    rows.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    rows
}

/// Enumerates every `k`-subset of the data as prototypes, evaluates its
/// Voronoi objective `V`, and compares the benchmark tuple against all others.
pub fn eta_zero_medoids(
    points: &Points,
    loss: &LossSpec,
    benchmark_medoids: &[usize],
    delta: f64,
    delta_approx: f64,
) -> Result<MedoidEtaReport> {
    let n = points.n();
    let k = benchmark_medoids.len();
    if n > ENUMERATION_LIMIT {
        return Err(Error::EnumerationBudget {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    if k == 0 || k > n || benchmark_medoids.iter().any(|&i| i >= n) {
        return domain("benchmark medoids must be k distinct valid indices with 1 <= k <= n");
    }
    if !(delta >= 0.0) || !(delta_approx >= 0.0) {
        return domain("gaps must be non-negative");
    }
    let value = |idx: &[usize]| -> Result<f64> {
        let protos = Prototypes::medoids(points, idx);
        let p = best_response_partition(points, &protos)?;
        objective(points, &p, &protos, loss)
    };
    let star = Prototypes::medoids(points, benchmark_medoids);
    let star_locs = sorted_locations(&star);
    let v_star = value(benchmark_medoids)?;
    let tol = VALUE_TIE_TOLERANCE * v_star.abs().max(1.0);

    let mut opt = f64::INFINITY;
    let mut delta_min = f64::INFINITY;
    let mut co_optimal = 0usize;
    let mut uniqueness_violated = false;
    let mut err = None;
    for_each_subset(n, k, |idx| {
        if err.is_some() {
            return;
        }
        match value(idx) {
            Ok(v) => {
                opt = opt.min(v);
                let diff = (v - v_star).abs();
                if diff <= tol {
                    co_optimal += 1;
                    if sorted_locations(&Prototypes::medoids(points, idx)) != star_locs {
                        uniqueness_violated = true;
                    }
                } else {
                    delta_min = delta_min.min(diff);
                }
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let lhs = (delta + delta_approx) * opt;
    // a candidate exactly at the gap must not pass through rounding of the gaps
    let gap_condition = lhs + tol < delta_min;
    Ok(MedoidEtaReport {
        eta_zero: gap_condition && !uniqueness_violated,
        gap_condition,
        delta_min,
        threshold_lhs: lhs,
        v_star,
        opt_value: opt,
        uniqueness_violated,
        co_optimal_tuples: co_optimal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unique_optimum_small_gap() {
        let x = Points::from_1d(&[0.0, 0.3, 1.0, 10.0, 10.2, 11.0]).unwrap();
        let r = eta_zero_medoids(&x, &LossSpec::linear(), &[1, 4], 0.001, 0.0).unwrap();
        assert!(r.eta_zero && !r.uniqueness_violated);
        assert_eq!(r.co_optimal_tuples, 1);
        assert!(r.delta_min > 0.0);
        let big = eta_zero_medoids(&x, &LossSpec::linear(), &[1, 4], 100.0, 0.0).unwrap();
        assert!(!big.eta_zero);
    }

    #[test]
    fn symmetric_instance_reports_ties() {
        // two points per cluster: either point is an optimal medoid
        let x = Points::from_1d(&[0.0, 1.0, 10.0, 11.0]).unwrap();
        let r = eta_zero_medoids(&x, &LossSpec::linear(), &[0, 2], 0.0, 0.0).unwrap();
        assert!(r.uniqueness_violated);
        assert_eq!(r.co_optimal_tuples, 4);
        assert!(!r.eta_zero);
        assert!(r.gap_condition);
    }
}
