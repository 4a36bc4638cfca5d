//! Optimality gaps and distances between prototype tuples.

use super::{objective, Exactness, SolveResult};
use crate::assignment::{bottleneck_assignment, bottleneck_assignment_brute};
use crate::error::{Error, Result};
use crate::geometry::{distance, Benchmark, Points, Prototypes};
use crate::loss::LossSpec;
use serde::{Deserialize, Serialize};

/// Whether the reference optimum is certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptKind {
    ExactOracle,
    BestKnown,
}

/// Multiplicative gaps of a candidate and of the benchmark against `OPT_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    #[serde(with = "crate::real")]
    pub delta: f64,
    #[serde(with = "crate::real")]
    pub delta_approx: f64,
    pub opt_value: f64,
    pub opt_kind: OptKind,
    pub candidate_value: f64,
    pub benchmark_value: f64,
}

/// Relative slack tolerated before a negative gap against an exact optimum is
/// treated as an internal inconsistency.
pub const GAP_TOLERANCE: f64 = 1e-9;

fn relative_gap(value: f64, opt: f64, kind: OptKind, what: &str) -> Result<f64> {
    if opt == 0.0 {
        return Ok(if value == 0.0 { 0.0 } else { f64::INFINITY });
    }
    let gap = value / opt - 1.0;
    if gap < -GAP_TOLERANCE && kind == OptKind::ExactOracle {
        return Err(Error::Internal(format!(
            "{what} objective {value} is below the exact optimum {opt}"
        )));
    }
    Ok(gap.max(0.0))
}

impl GapReport {
    pub fn from_values(
        candidate: f64,
        benchmark: f64,
        opt: f64,
        opt_kind: OptKind,
    ) -> Result<Self> {
        Ok(Self {
            delta: relative_gap(candidate, opt, opt_kind, "candidate")?,
            delta_approx: relative_gap(benchmark, opt, opt_kind, "benchmark")?,
            opt_value: opt,
            opt_kind,
            candidate_value: candidate,
            benchmark_value: benchmark,
        })
    }
}

/// `delta = L(candidate)/OPT - 1` and `delta_approx = L(C*, theta*)/OPT - 1`.
pub fn gaps(
    points: &Points,
    candidate: &SolveResult,
    benchmark: &Benchmark,
    loss: &LossSpec,
    opt: &SolveResult,
) -> Result<GapReport> {
    let kind = match opt.exactness {
        Exactness::Heuristic => OptKind::BestKnown,
        _ => OptKind::ExactOracle,
    };
    let bench = objective(points, &benchmark.partition, &benchmark.prototypes, loss)?;
    GapReport::from_values(candidate.objective, bench, opt.objective, kind)
}

fn check_shapes(a: &Prototypes, b: &Prototypes) -> Result<()> {
    if a.k() != b.k() {
        return Err(Error::DimensionMismatch {
            expected: a.k(),
            got: b.k(),
        });
    }
    if a.d() != b.d() {
        return Err(Error::DimensionMismatch {
            expected: a.d(),
            got: b.d(),
        });
    }
    Ok(())
}

/// Largest `k` handled by permutation enumeration.
pub const BRUTE_FORCE_K: usize = 8;

/// `eta = min_pi max_j d(hat_j, star_{pi(j)})` and the minimizing `pi`
/// (lexicographically smallest on ties).
pub fn displacement(hat: &Prototypes, star: &Prototypes) -> Result<(f64, Vec<usize>)> {
    check_shapes(hat, star)?;
    let k = hat.k();
    let cost: Vec<Vec<f64>> = (0..k)
        .map(|j| (0..k).map(|l| distance(hat.get(j), star.get(l))).collect())
        .collect();
    let a = if k <= BRUTE_FORCE_K {
        bottleneck_assignment_brute(&cost)
    } else {
        bottleneck_assignment(&cost)
    };
    Ok((a.value, a.perm))
}

/// Two-sided Hausdorff distance between prototype sets.
pub fn hausdorff_drift(a: &Prototypes, b: &Prototypes) -> Result<f64> {
    check_shapes(a, b)?;
    let one_sided = |p: &Prototypes, q: &Prototypes| {
        (0..p.k())
            .map(|j| {
                (0..q.k())
                    .map(|l| distance(p.get(j), q.get(l)))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    Ok(one_sided(a, b).max(one_sided(b, a)))
}
