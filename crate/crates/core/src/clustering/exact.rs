//! Exact optima: dynamic programming over sorted 1D data and exhaustive
//! enumeration for small instances.

use super::{
    best_response_partition, best_response_prototypes, objective, Exactness, RestartRun,
    SolveResult,
};
use crate::combinatorics::{for_each_set_partition, for_each_subset};
use crate::error::{precondition, Error, Result};
use crate::geometry::{Feasibility, Points, Prototypes};
use crate::loss::{LossKind, LossSpec};
use crate::partition::Partition;
use rayon::prelude::*;

/// Largest `n` accepted by the enumeration oracles.
pub const ENUMERATION_LIMIT: usize = 12;

fn check_k(points: &Points, k: usize) -> Result<()> {
    if k == 0 || k > points.n() {
        return precondition(format!("need 1 <= k <= n, got k = {k}, n = {}", points.n()));
    }
    Ok(())
}

/// Best-response prototypes of a partition and the resulting objective.
pub fn profiled_objective(
    points: &Points,
    partition: &Partition,
    loss: &LossSpec,
    feasibility: Feasibility,
) -> Result<(Prototypes, f64)> {
    let protos = best_response_prototypes(points, partition, loss, feasibility)?;
    let value = objective(points, partition, &protos, loss)?;
    Ok((protos, value))
}

fn exactness_of(points: &Points, loss: &LossSpec, feasibility: Feasibility) -> Exactness {
    match (feasibility, &loss.kind) {
        (Feasibility::DataRestricted, _) => Exactness::Exact,
        (Feasibility::Free, LossKind::Squared) => Exactness::Exact,
        (Feasibility::Free, LossKind::Linear) if points.d() == 1 => Exactness::Exact,
        _ => Exactness::ExactUpToProfilingTolerance,
    }
}

fn single(
    partition: Partition,
    prototypes: Prototypes,
    value: f64,
    method: &str,
    exactness: Exactness,
) -> SolveResult {
    SolveResult {
        partition: partition.clone(),
        prototypes: prototypes.clone(),
        objective: value,
        restarts_used: 1,
        per_restart_objectives: vec![value],
        best_restart: 0,
        seed: 0,
        method: method.into(),
        exactness,
        runs: vec![RestartRun {
            partition,
            prototypes,
            objective: value,
            iterations: 0,
            trace: vec![value],
        }],
    }
}

/// Every partition into exactly `k` nonempty clusters with its profiled
/// prototypes and objective, in restricted-growth-string order.
pub fn enumerate_profiled(
    points: &Points,
    k: usize,
    loss: &LossSpec,
    feasibility: Feasibility,
) -> Result<Vec<(Partition, Prototypes, f64)>> {
    check_k(points, k)?;
    let n = points.n();
    if n > ENUMERATION_LIMIT {
        return Err(Error::EnumerationBudget {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut all = Vec::new();
    for_each_set_partition(n, k, |labels| all.push(labels.to_vec()));
    all.into_par_iter()
        .map(|labels| {
            let p = Partition::new(labels, k)?;
            let (protos, v) = profiled_objective(points, &p, loss, feasibility)?;
            Ok((p, protos, v))
        })
        .collect()
}

/// Exhaustive optimum. Free prototypes: all partitions into `k` blocks, each
/// profiled. Data-restricted: all `k`-subsets of the data as prototypes with
/// the Voronoi partition. Ties go to the first candidate in enumeration order.
pub fn brute_force_opt(
    points: &Points,
    k: usize,
    loss: &LossSpec,
    feasibility: Feasibility,
) -> Result<SolveResult> {
    check_k(points, k)?;
    let n = points.n();
    if n > ENUMERATION_LIMIT {
        return Err(Error::EnumerationBudget {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let exactness = exactness_of(points, loss, feasibility);
    match feasibility {
        Feasibility::Free => {
            let all = enumerate_profiled(points, k, loss, feasibility)?;
            let mut best = 0;
            for (i, c) in all.iter().enumerate() {
                if c.2 < all[best].2 {
                    best = i;
                }
            }
            let (p, protos, v) = all
                .into_iter()
                .nth(best)
                .expect("k <= n yields a partition");
            Ok(single(p, protos, v, "brute-force-partitions", exactness))
        }
        Feasibility::DataRestricted => {
            let mut best: Option<(Vec<usize>, f64)> = None;
            let mut err = None;
            for_each_subset(n, k, |idx| {
                if err.is_some() {
                    return;
                }
                let protos = Prototypes::medoids(points, idx);
                let value = best_response_partition(points, &protos)
                    .and_then(|p| objective(points, &p, &protos, loss));
                match value {
                    Ok(v) if best.as_ref().is_none_or(|(_, b)| v < *b) => {
                        best = Some((idx.to_vec(), v))
                    }
                    Ok(_) => {}
                    Err(e) => err = Some(e),
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            let (idx, v) = best.expect("k <= n yields a subset");
            let protos = Prototypes::medoids(points, &idx);
            let p = best_response_partition(points, &protos)?;
            Ok(single(p, protos, v, "brute-force-medoids", exactness))
        }
    }
}

/// Segment costs on sorted 1D data via prefix sums.
struct SegmentCost {
    xs: Vec<f64>,
    s1: Vec<f64>,
    s2: Vec<f64>,
    squared: bool,
    weight: f64,
}

impl SegmentCost {
    fn new(xs: Vec<f64>, loss: &LossSpec) -> Result<Self> {
        let squared = match loss.kind {
            LossKind::Squared => true,
            LossKind::Linear => false,
            _ => {
                return Err(Error::Unsupported(format!(
                    "the 1D dynamic program supports squared and linear losses, not {}",
                    loss.name()
                )))
            }
        };
        // shift by the mean to limit cancellation in the SSE formula
        let shift = if squared {
            xs.iter().sum::<f64>() / xs.len() as f64
        } else {
            0.0
        };
        let mut s1 = vec![0.0; xs.len() + 1];
        let mut s2 = vec![0.0; xs.len() + 1];
        for (i, &x) in xs.iter().enumerate() {
            let y = x - shift;
            s1[i + 1] = s1[i] + y;
            s2[i + 1] = s2[i] + y * y;
        }
        Ok(Self {
            xs,
            s1,
            s2,
            squared,
            weight: loss.weight,
        })
    }

    /// Cost of the sorted segment `[a, b)`.
    fn cost(&self, a: usize, b: usize) -> f64 {
        let m = (b - a) as f64;
        let base = if self.squared {
            let s = self.s1[b] - self.s1[a];
            (self.s2[b] - self.s2[a] - s * s / m).max(0.0)
        } else {
            let med = a + (b - a - 1) / 2;
            let xm = self.xs[med];
            let below = xm * (med - a) as f64 - (self.s1[med] - self.s1[a]);
            let above = (self.s1[b] - self.s1[med + 1]) - xm * (b - med - 1) as f64;
            below + above
        };
        self.weight * base
    }
}

/// The two best contiguous partitions found by the 1D dynamic program, with
/// objectives re-evaluated from their profiled prototypes.
#[derive(Debug, Clone)]
pub struct DpTop2 {
    pub best: (Partition, f64),
    /// `None` when only one partition into `k` contiguous blocks exists.
    pub second: Option<(Partition, f64)>,
}

#[derive(Clone, Copy)]
struct Entry {
    value: f64,
    start: usize,
    rank: usize,
}

fn push_top2(slot: &mut Vec<Entry>, e: Entry) {
    let pos = slot
        .iter()
        .position(|s| e.value < s.value)
        .unwrap_or(slot.len());
    if pos < 2 {
        slot.insert(pos, e);
        slot.truncate(2);
    }
}

fn sorted_order(points: &Points) -> Vec<usize> {
    let mut ord: Vec<usize> = (0..points.n()).collect();
    ord.sort_by(|&a, &b| {
        points.row(a)[0]
            .total_cmp(&points.row(b)[0])
            .then(a.cmp(&b))
    });
    ord
}

/// Dynamic program over sorted 1D data keeping the two best entries per
/// state, so the runner-up contiguous partition is available for margins.
pub fn exact_1d_dp_top2(points: &Points, k: usize, loss: &LossSpec) -> Result<DpTop2> {
    if points.d() != 1 {
        return precondition(format!(
            "the 1D dynamic program needs d = 1, got d = {}",
            points.d()
        ));
    }
    check_k(points, k)?;
    let n = points.n();
    let ord = sorted_order(points);
    let seg = SegmentCost::new(ord.iter().map(|&i| points.row(i)[0]).collect(), loss)?;

    // table[j][i]: best entries covering the first i sorted points with j + 1 blocks
    let mut table: Vec<Vec<Vec<Entry>>> = vec![vec![Vec::new(); n + 1]; k];
    for i in 1..=n {
        table[0][i].push(Entry {
            value: seg.cost(0, i),
            start: 0,
            rank: 0,
        });
    }
    for j in 1..k {
        for i in j + 1..=n {
            let mut slot = Vec::with_capacity(3);
            for t in j..i {
                let c = seg.cost(t, i);
                for (rank, prev) in table[j - 1][t].iter().enumerate() {
                    push_top2(
                        &mut slot,
                        Entry {
                            value: prev.value + c,
                            start: t,
                            rank,
                        },
                    );
                }
            }
            table[j][i] = slot;
        }
    }

    let trace = |rank: usize| -> Result<Partition> {
        let mut labels = vec![0usize; n];
        let (mut j, mut i, mut r) = (k - 1, n, rank);
        loop {
            let e = table[j][i][r];
            for &p in &ord[e.start..i] {
                labels[p] = j;
            }
            if j == 0 {
                break;
            }
            i = e.start;
            r = e.rank;
            j -= 1;
        }
        Partition::new(labels, k)
    };
    let eval = |p: Partition| -> Result<(Partition, f64)> {
        let (_, v) = profiled_objective(points, &p, loss, Feasibility::Free)?;
        Ok((p, v))
    };
    let finals = &table[k - 1][n];
    let mut best = eval(trace(0)?)?;
    let mut second = if finals.len() > 1 {
        Some(eval(trace(1)?)?)
    } else {
        None
    };
    // re-evaluation may reorder near-ties
    if let Some(s) = second.as_mut() {
        if s.1 < best.1 {
            std::mem::swap(s, &mut best);
        }
    }
    Ok(DpTop2 { best, second })
}

/// Exact optimum for 1D data under squared or linear loss with free
/// prototypes; optimal clusters are contiguous in sorted order.
pub fn exact_1d_dp(points: &Points, k: usize, loss: &LossSpec) -> Result<SolveResult> {
    let top = exact_1d_dp_top2(points, k, loss)?;
    let (p, _) = top.best;
    let (protos, v) = profiled_objective(points, &p, loss, Feasibility::Free)?;
    Ok(single(p, protos, v, "exact-1d-dp", Exactness::Exact))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(xs: &[f64]) -> Points {
        Points::from_1d(xs).unwrap()
    }

    #[test]
    fn dp_on_two_pairs() {
        let x = pts(&[10.1, 0.0, 10.0, 0.1]);
        let r = exact_1d_dp(&x, 2, &LossSpec::squared()).unwrap();
        assert!((r.objective - 0.01).abs() < 1e-12);
        assert_eq!(r.partition.canonical(), vec![0, 1, 0, 1]);
        let b = brute_force_opt(&x, 2, &LossSpec::squared(), Feasibility::Free).unwrap();
        assert!((b.objective - r.objective).abs() < 1e-12);
    }

    #[test]
    fn dp_with_k_equal_n() {
        let x = pts(&[3.0, 1.0, 2.0]);
        assert_eq!(
            exact_1d_dp(&x, 3, &LossSpec::linear()).unwrap().objective,
            0.0
        );
        assert_eq!(
            brute_force_opt(&x, 3, &LossSpec::squared(), Feasibility::Free)
                .unwrap()
                .objective,
            0.0
        );
    }

    #[test]
    fn dp_rejects_other_inputs() {
        let x2 = Points::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert!(exact_1d_dp(&x2, 1, &LossSpec::squared()).is_err());
        let x = pts(&[0.0, 1.0]);
        assert!(matches!(
            exact_1d_dp(&x, 1, &LossSpec::huber(1.0).unwrap()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn brute_force_medoids() {
        let x = pts(&[0.0, 0.1, 10.0, 10.1]);
        let r = brute_force_opt(&x, 2, &LossSpec::squared(), Feasibility::DataRestricted).unwrap();
        // medoids 0 and 10: each cluster pays 0.1^2
        assert!((r.objective - 0.02).abs() < 1e-12);
        assert_eq!(r.prototypes.medoid_indices, Some(vec![0, 2]));
    }

    #[test]
    fn enumeration_budget() {
        let x = pts(&(0..13).map(f64::from).collect::<Vec<_>>());
        assert!(matches!(
            brute_force_opt(&x, 2, &LossSpec::squared(), Feasibility::Free),
            Err(Error::EnumerationBudget { n: 13, limit: 12 })
        ));
    }

    #[test]
    fn second_best_is_distinct() {
        let x = pts(&[0.0, 1.0, 5.0, 6.0, 20.0]);
        let t = exact_1d_dp_top2(&x, 2, &LossSpec::squared()).unwrap();
        let s = t.second.unwrap();
        assert_ne!(t.best.0.canonical(), s.0.canonical());
        assert!(s.1 >= t.best.1);
        let t1 = exact_1d_dp_top2(&pts(&[0.0, 1.0]), 2, &LossSpec::squared()).unwrap();
        assert!(t1.second.is_none());
    }
}
