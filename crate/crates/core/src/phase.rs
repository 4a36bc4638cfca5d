//! Two-ball models, exact-recovery thresholds, phase-diagram sweeps, the
//! heavy-cluster-splitting constructions and the two combinatorial lemma
//! oracles behind the recovery thresholds.

use crate::clustering::{
    enumerate_profiled, exact_1d_dp_top2, profiled_objective, ENUMERATION_LIMIT,
};
use crate::error::{domain, precondition, Error, Result};
use crate::geometry::{Feasibility, Instance, Points, Prototypes};
use crate::loss::{LossKind, LossSpec};
use crate::oracle::Tally;
use crate::partition::Partition;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Layout {
    /// Rejection-sampled uniform points in `d`-dimensional balls.
    UniformInBall { seed: u64, d: usize },
    /// Equispaced points filling `[anchor - D, anchor + D]`.
    Collinear1d,
    /// `n1` points at 0, half of the heavy cluster at `Delta - D` and half
    /// at `Delta + D`.
    PointmassAdversarial,
}

impl Layout {
    pub fn name(&self) -> &'static str {
        match self {
            Layout::UniformInBall { .. } => "uniform-in-ball",
            Layout::Collinear1d => "collinear-1d",
            Layout::PointmassAdversarial => "pointmass-adversarial",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoBallConfig {
    pub n1: usize,
    pub n2: usize,
    pub radius: f64,
    pub delta: f64,
    pub layout: Layout,
}

fn equispaced(center: f64, radius: f64, m: usize) -> Vec<f64> {
    if m == 1 {
        return vec![center];
    }
    (0..m)
        .map(|i| center - radius + 2.0 * radius * i as f64 / (m - 1) as f64)
        .collect()
}

fn sample_ball(rng: &mut ChaCha8Rng, center: &[f64], radius: f64) -> Vec<f64> {
    loop {
        let offset: Vec<f64> = center.iter().map(|_| rng.gen_range(-1.0..=1.0)).collect();
        if offset.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
            return center
                .iter()
                .zip(&offset)
                .map(|(c, o)| c + radius * o)
                .collect();
        }
    }
}

/// Builds a two-ball instance whose benchmark is the generating partition
/// with the ball centers as anchors.
pub fn generate_two_ball(cfg: &TwoBallConfig) -> Result<Instance> {
    if cfg.n1 == 0 || cfg.n2 == 0 {
        return domain("both balls need at least one point");
    }
    if !(cfg.radius > 0.0 && cfg.radius.is_finite()) || !(cfg.delta > 0.0 && cfg.delta.is_finite())
    {
        return domain("radius and anchor distance must be positive and finite");
    }
    let labels: Vec<usize> = std::iter::repeat_n(0, cfg.n1)
        .chain(std::iter::repeat_n(1, cfg.n2))
        .collect();
    let partition = Partition::new(labels, 2)?;
    let (points, anchors) = match cfg.layout {
        Layout::Collinear1d => {
            let mut xs = equispaced(0.0, cfg.radius, cfg.n1);
            xs.extend(equispaced(cfg.delta, cfg.radius, cfg.n2));
            (
                Points::from_1d(&xs)?,
                Prototypes::from_1d(&[0.0, cfg.delta])?,
            )
        }
        Layout::PointmassAdversarial => {
            if !cfg.n2.is_multiple_of(2) {
                return domain(format!(
                    "the adversarial layout needs an even n2, got {}",
                    cfg.n2
                ));
            }
            let mut xs = vec![0.0; cfg.n1];
            xs.extend(std::iter::repeat_n(cfg.delta - cfg.radius, cfg.n2 / 2));
            xs.extend(std::iter::repeat_n(cfg.delta + cfg.radius, cfg.n2 / 2));
            (
                Points::from_1d(&xs)?,
                Prototypes::from_1d(&[0.0, cfg.delta])?,
            )
        }
        Layout::UniformInBall { seed, d } => {
            if d == 0 {
                return domain("dimension must be at least 1");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dir = loop {
                let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-3 && norm <= 1.0 {
                    break v.into_iter().map(|x| x / norm).collect::<Vec<_>>();
                }
            };
            let a1 = vec![0.0; d];
            let a2: Vec<f64> = dir.iter().map(|u| cfg.delta * u).collect();
            let mut rows = Vec::with_capacity(cfg.n1 + cfg.n2);
            rows.extend((0..cfg.n1).map(|_| sample_ball(&mut rng, &a1, cfg.radius)));
            rows.extend((0..cfg.n2).map(|_| sample_ball(&mut rng, &a2, cfg.radius)));
            (Points::from_rows(&rows)?, Prototypes::from_rows(&[a1, a2])?)
        }
    };
    Instance::with_benchmark(points, partition, anchors)
}

fn check_balance(c_b: f64) -> Result<()> {
    if !(c_b > 0.0 && c_b <= 0.5) {
        return domain(format!("balance must lie in (0, 1/2], got {c_b}"));
    }
    Ok(())
}

/// Sufficient ratio `Delta/D` for exact recovery under squared loss.
pub fn threshold_kmeans(c_b: f64) -> Result<f64> {
    check_balance(c_b)?;
    Ok(2.0 + 2.0 / c_b.sqrt())
}

/// Sufficient ratio `Delta/D` for exact recovery under linear loss on the line.
pub fn threshold_kmedian_1d(c_b: f64) -> Result<f64> {
    check_balance(c_b)?;
    Ok(2.0 + 1.0 / c_b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecoverySolver {
    Exact1dDp,
    BruteForce,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryCheck {
    pub recovered: bool,
    pub opt_partition: Partition,
    pub opt_value: f64,
    pub benchmark_value: f64,
    /// Best objective among partitions other than the benchmark (up to label
    /// swap) minus the benchmark partition's profiled objective. Negative when
    /// another partition beats the benchmark.
    #[serde(with = "crate::real")]
    pub margin_of_victory: f64,
}

/// Relative tolerance under which a runner-up counts as tying the optimum.
pub const RECOVERY_TIE_TOLERANCE: f64 = 1e-9;

fn same_partition(a: &Partition, b: &Partition) -> bool {
    a.canonical() == b.canonical()
}

/// Decides whether the benchmark partition is the unique exact minimizer of
/// the profiled objective with free prototypes. With the 1D dynamic program
/// the runner-up ranges over contiguous partitions.
pub fn exact_recovery_check(
    inst: &Instance,
    loss: &LossSpec,
    solver: RecoverySolver,
) -> Result<RecoveryCheck> {
    let bench = inst.benchmark()?;
    let k = bench.partition.k();
    let (_, bench_value) =
        profiled_objective(&inst.points, &bench.partition, loss, Feasibility::Free)?;
    let (opt_partition, opt_value, runner_up) = match solver {
        RecoverySolver::Exact1dDp => {
            if !matches!(loss.kind, LossKind::Squared | LossKind::Linear) {
                return Err(Error::Unsupported(format!(
                    "the 1D dynamic program handles squared and linear loss, not {}",
                    loss.name()
                )));
            }
            let top = exact_1d_dp_top2(&inst.points, k, loss)?;
            let (best, best_value) = top.best;
            let runner_up = if same_partition(&best, &bench.partition) {
                top.second.map_or(f64::INFINITY, |s| s.1)
            } else {
                best_value
            };
            (best, best_value, runner_up)
        }
        RecoverySolver::BruteForce => {
            if inst.n() > ENUMERATION_LIMIT {
                return Err(Error::EnumerationBudget {
                    n: inst.n(),
                    limit: ENUMERATION_LIMIT,
                });
            }
            let all = enumerate_profiled(&inst.points, k, loss, Feasibility::Free)?;
            let target = bench.partition.canonical();
            let mut best: Option<(Partition, f64)> = None;
            let mut runner_up = f64::INFINITY;
            for (p, _, v) in all {
                if p.canonical() != target {
                    runner_up = runner_up.min(v);
                }
                if best.as_ref().is_none_or(|b| v < b.1) {
                    best = Some((p, v));
                }
            }
            let (p, v) = best.ok_or_else(|| Error::Internal("no partition enumerated".into()))?;
            (p, v, runner_up)
        }
    };
    let margin = runner_up - bench_value;
    let tol = RECOVERY_TIE_TOLERANCE * opt_value.abs().max(1.0);
    Ok(RecoveryCheck {
        recovered: same_partition(&opt_partition, &bench.partition) && margin > tol,
        opt_partition,
        opt_value,
        benchmark_value: bench_value,
        margin_of_victory: margin,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub ratio: f64,
    /// Realized `n1 / (n1 + n2)`.
    pub c_b: f64,
    pub loss: String,
    pub recovered: bool,
    pub sufficient_kmeans: bool,
    pub sufficient_kmedian: bool,
    #[serde(with = "crate::real")]
    pub margin_of_victory: f64,
}

impl PhaseCell {
    /// The sufficient predicate that applies to this cell's loss.
    pub fn sufficient(&self) -> bool {
        match self.loss.as_str() {
            "squared" => self.sufficient_kmeans,
            "linear" => self.sufficient_kmedian,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub ratios: Vec<f64>,
    pub balances: Vec<f64>,
    pub n: usize,
    pub radius: f64,
}

impl Default for PhaseGrid {
    /// Ratios `2.1, 2.2, ..., 10.0` and balances `0.1, 0.125, ..., 0.5`
    /// with `n = 40`.
    fn default() -> Self {
        Self {
            ratios: (21..=100).map(|i| i as f64 / 10.0).collect(),
            balances: (4..=20).map(|i| i as f64 / 40.0).collect(),
            n: 40,
            radius: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSweep {
    pub cells: Vec<PhaseCell>,
    /// Indices of cells that satisfy their sufficient predicate but were not
    /// recovered.
    pub sufficiency_violations: Vec<usize>,
}

/// Cluster sizes for a nominal balance; the adversarial layout rounds an odd
/// heavy cluster up by one point.
pub fn cell_sizes(n: usize, c_b: f64, layout: Layout) -> Result<(usize, usize)> {
    check_balance(c_b)?;
    let n1 = ((c_b * n as f64).round() as usize).max(1);
    if n1 >= n {
        return domain(format!("balance {c_b} leaves no heavy cluster at n = {n}"));
    }
    let mut n2 = n - n1;
    if matches!(layout, Layout::PointmassAdversarial) && n2 % 2 == 1 {
        n2 += 1;
    }
    Ok((n1, n2))
}

/// Runs exact recovery over the grid with the 1D dynamic program. Cells are
/// computed in parallel and returned in ratio-major order.
pub fn phase_sweep(grid: &PhaseGrid, loss: &LossSpec, layout: Layout) -> Result<PhaseSweep> {
    if matches!(layout, Layout::UniformInBall { .. }) {
        return precondition("phase sweeps need a one-dimensional layout");
    }
    let jobs: Vec<(f64, f64)> = grid
        .ratios
        .iter()
        .flat_map(|&r| grid.balances.iter().map(move |&c| (r, c)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(ratio, c_b)| {
            let (n1, n2) = cell_sizes(grid.n, c_b, layout)?;
            let inst = generate_two_ball(&TwoBallConfig {
                n1,
                n2,
                radius: grid.radius,
                delta: ratio * grid.radius,
                layout,
            })?;
            let check = exact_recovery_check(&inst, loss, RecoverySolver::Exact1dDp)?;
            let realized = n1.min(n2) as f64 / (n1 + n2) as f64;
            Ok(PhaseCell {
                ratio,
                c_b: realized,
                loss: loss.name().to_string(),
                recovered: check.recovered,
                sufficient_kmeans: ratio > threshold_kmeans(realized)?,
                sufficient_kmedian: ratio > threshold_kmedian_1d(realized)?,
                margin_of_victory: check.margin_of_victory,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sufficiency_violations = cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.sufficient() && !c.recovered)
        .map(|(i, _)| i)
        .collect();
    Ok(PhaseSweep {
        cells,
        sufficiency_violations,
    })
}

/// The heavy-cluster-splitting comparison at one adversarial instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightnessCase {
    pub n1: usize,
    pub n2: usize,
    pub ratio: f64,
    pub loss: String,
    /// Cost of the split with one prototype on the light mass and the near
    /// heavy mass, the other on the far heavy mass.
    pub split_cost: f64,
    /// Cost of the benchmark partition at its best prototypes.
    pub correct_cost: f64,
    /// `split_cost < correct_cost`: the construction predicts failure.
    pub predicted_failure: bool,
    pub recovered: bool,
}

impl TightnessCase {
    /// The exact minimizer agrees with the closed-form prediction.
    pub fn consistent(&self) -> bool {
        !self.predicted_failure || !self.recovered
    }
}

/// Builds the point-mass construction and compares the closed-form split and
/// benchmark costs with the exact 1D minimizer.
pub fn adversarial_case(
    n1: usize,
    n2: usize,
    radius: f64,
    delta: f64,
    loss: &LossSpec,
) -> Result<TightnessCase> {
    let (split_cost, correct_cost) = match loss.kind {
        LossKind::Squared => (
            n1 as f64 * (delta - radius).powi(2),
            n2 as f64 * radius * radius,
        ),
        LossKind::Linear => (n1 as f64 * (delta - radius), n2 as f64 * radius),
        _ => {
            return Err(Error::Unsupported(format!(
                "tightness constructions cover squared and linear loss, not {}",
                loss.name()
            )))
        }
    };
    let inst = generate_two_ball(&TwoBallConfig {
        n1,
        n2,
        radius,
        delta,
        layout: Layout::PointmassAdversarial,
    })?;
    let check = exact_recovery_check(&inst, loss, RecoverySolver::Exact1dDp)?;
    Ok(TightnessCase {
        n1,
        n2,
        ratio: delta / radius,
        loss: loss.name().to_string(),
        split_cost,
        correct_cost,
        predicted_failure: split_cost < correct_cost,
        recovered: check.recovered,
    })
}

/// Closed-form failure line of the adversarial layout: `1 + sqrt(n2/n1)` for
/// squared loss, `1 + n2/n1` for linear loss.
pub fn failure_ratio(n1: usize, n2: usize, loss: &LossSpec) -> Result<f64> {
    let r = n2 as f64 / n1 as f64;
    match loss.kind {
        LossKind::Squared => Ok(1.0 + r.sqrt()),
        LossKind::Linear => Ok(1.0 + r),
        _ => Err(Error::Unsupported(format!(
            "no failure line for {}",
            loss.name()
        ))),
    }
}

/// One-dimensional absolute-deviation objective around the lower median.
pub fn median_objective(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let med = v[(v.len() - 1) / 2];
    v.iter().map(|x| (x - med).abs()).sum()
}

/// Intervals `[u1 - D, u1 + D]` and `[u2 - D, u2 + D]` with positive gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergeIntervals {
    pub u1: f64,
    pub u2: f64,
    pub radius: f64,
}

impl MergeIntervals {
    pub fn gamma(&self) -> f64 {
        self.u2 - self.u1 - 2.0 * self.radius
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergePenalty {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Checks `phi(A u B) >= phi(A) + phi(B) + gamma min(|A|, |B|)`.
pub fn merge_penalty_oracle(a: &[f64], b: &[f64], iv: MergeIntervals) -> Result<MergePenalty> {
    let gamma = iv.gamma();
    if !(gamma > 0.0) || !(iv.radius >= 0.0) {
        return precondition(format!(
            "intervals must be disjoint with positive gap, got gamma = {gamma}"
        ));
    }
    let inside = |xs: &[f64], u: f64| xs.iter().all(|&x| x >= u - iv.radius && x <= u + iv.radius);
    if !inside(a, iv.u1) || !inside(b, iv.u2) {
        return precondition("merge penalty points must lie in their intervals");
    }
    let mut all = a.to_vec();
    all.extend_from_slice(b);
    let lhs = median_objective(&all);
    let rhs = median_objective(a) + median_objective(b) + gamma * a.len().min(b.len()) as f64;
    Ok(MergePenalty {
        lhs,
        rhs,
        holds: lhs >= rhs,
    })
}

/// Fuzzes the merge penalty on a dyadic grid, where every sum is exact in
/// floating point and the comparison needs no tolerance.
pub fn merge_penalty_fuzz(cases: usize, seed: u64) -> Result<Tally> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new("merge-penalty");
    const SCALE: f64 = 1.0 / 64.0;
    for _ in 0..cases {
        let radius = rng.gen_range(1..=128) as f64 * SCALE;
        let gamma = rng.gen_range(1..=256) as f64 * SCALE;
        let u1 = rng.gen_range(-256..=256) as f64 * SCALE;
        let iv = MergeIntervals {
            u1,
            u2: u1 + 2.0 * radius + gamma,
            radius,
        };
        let steps = (radius / SCALE) as i64;
        let draw = |rng: &mut ChaCha8Rng, u: f64| -> Vec<f64> {
            let m = rng.gen_range(0..=12);
            (0..m)
                .map(|_| u + rng.gen_range(-steps..=steps) as f64 * SCALE)
                .collect()
        };
        let a = draw(&mut rng, iv.u1);
        let b = draw(&mut rng, iv.u2);
        let r = merge_penalty_oracle(&a, &b, iv)?;
        tally.record(r.holds, || {
            format!(
                "A = {a:?}, B = {b:?}, intervals {iv:?}: {} < {}",
                r.lhs, r.rhs
            )
        });
    }
    Ok(tally)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingCheck {
    pub psi: f64,
    pub lower: f64,
    pub holds: bool,
}

/// `Psi(m1, m2) >= n1 (m1 + m2) / n`, decided in exact integer arithmetic;
/// a term with zero numerator counts as zero.
pub fn mixing_coefficient_check(n1: u64, n2: u64, m1: u64, m2: u64) -> Result<MixingCheck> {
    let n = n1 + n2;
    if n1 == 0 || n1 > n2 || m1 > n1 || m2 > n2 || 2 * (m1 + m2) > n {
        return precondition(format!(
            "need 1 <= n1 <= n2, m1 <= n1, m2 <= n2 and m1 + m2 <= n/2 (got n1={n1}, n2={n2}, m1={m1}, m2={m2})"
        ));
    }
    // Psi = p1/q1 + p2/q2
    let (p1, q1) = ((n1 - m1) * m2, n1 - m1 + m2);
    let (p2, q2) = ((n2 - m2) * m1, n2 - m2 + m1);
    let frac = |p: u64, q: u64| -> (u128, u128) {
        if p == 0 {
            (0, 1)
        } else {
            (p as u128, q as u128)
        }
    };
    let ((a, b), (c, d)) = (frac(p1, q1), frac(p2, q2));
    let num = a * d + c * b;
    let den = b * d;
    let m = (m1 + m2) as u128;
    let holds = num * n as u128 >= n1 as u128 * m * den;
    Ok(MixingCheck {
        psi: num as f64 / den as f64,
        lower: n1 as f64 * m as f64 / n as f64,
        holds,
    })
}

/// Every admissible `(m1, m2)` for all `1 <= n1 <= n2 <= max_n`.
pub fn mixing_coefficient_exhaustive(max_n: u64) -> Result<Tally> {
    let mut tally = Tally::new("mixing-coefficient");
    for n2 in 1..=max_n {
        for n1 in 1..=n2 {
            let half = (n1 + n2) / 2;
            for m1 in 0..=n1 {
                for m2 in 0..=n2.min(half.saturating_sub(m1)) {
                    if m1 + m2 > half {
                        continue;
                    }
                    let r = mixing_coefficient_check(n1, n2, m1, m2)?;
                    tally.record(r.holds, || {
                        format!(
                            "n1={n1} n2={n2} m1={m1} m2={m2}: psi {} < {}",
                            r.psi, r.lower
                        )
                    });
                }
            }
        }
    }
    Ok(tally)
}
