//! Brute-force verification suites for the stability inequalities.
//!
//! Each suite draws small instances from a seeded generator, enumerates the
//! relevant solution space exhaustively and counts violations. Suites are
//! deterministic for a given seed; instances are processed in parallel and
//! merged in generation order.

use crate::certify::{
    condition_number, eta_bound_kmeans, eta_zero_medoids, global_bound, hamming_tube_bound,
    local_core_bound, BoundInputs, TubeInputs,
};
use crate::clustering::{
    best_response_partition, brute_force_opt, displacement, enumerate_profiled, objective,
    profiled_objective,
};
use crate::combinatorics::for_each_subset;
use crate::error::Result;
use crate::geometry::{
    core_belt, summarize_geometry, Feasibility, GeometrySummary, Instance, Points, Prototypes,
};
use crate::loss::LossSpec;
use crate::partition::{misclassification_rate, mismatch_count, Partition};
use crate::phase::{
    generate_two_ball, merge_penalty_fuzz, mixing_coefficient_exhaustive, Layout, TwoBallConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Pass/fail counts of one suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub name: String,
    pub cases: u64,
    pub violations: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<String>,
    /// Suite-specific counts (instances drawn, non-vacuous checks, ...).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub counters: BTreeMap<String, u64>,
}

impl Tally {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            cases: 0,
            violations: 0,
            first_violation: None,
            counters: BTreeMap::new(),
        }
    }

    pub fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.violations += 1;
            if self.first_violation.is_none() {
                self.first_violation = Some(describe());
            }
        }
    }

    pub fn bump(&mut self, counter: &str, by: u64) {
        *self.counters.entry(counter.to_string()).or_insert(0) += by;
    }

    pub fn counter(&self, counter: &str) -> u64 {
        self.counters.get(counter).copied().unwrap_or(0)
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn merge(&mut self, other: Tally) {
        self.cases += other.cases;
        self.violations += other.violations;
        if self.first_violation.is_none() {
            self.first_violation = other.first_violation;
        }
        for (k, v) in other.counters {
            *self.counters.entry(k).or_insert(0) += v;
        }
    }
}

fn merged(name: &str, parts: Vec<Tally>) -> Tally {
    let mut t = Tally::new(name);
    for p in parts {
        t.merge(p);
    }
    t
}

/// Relative slack for comparisons between a measured quantity and a bound
/// computed through several floating-point operations.
pub const BOUND_TOLERANCE: f64 = 1e-12;

fn within(measured: f64, bound: f64) -> bool {
    measured <= bound + BOUND_TOLERANCE * bound.abs().max(1.0)
}

/// Size and seed of an instance-based suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub instances: usize,
    pub max_n: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            instances: 200,
            max_n: 10,
            seed: 2024,
        }
    }
}

/// A two-ball instance whose benchmark anchors are the profiled prototypes
/// of the generating partition, together with its geometry.
pub struct Anchored {
    pub instance: Instance,
    pub geometry: GeometrySummary,
    pub benchmark_value: f64,
}

/// Draws disjoint-ball two-cluster instances until one has a positive margin
/// after re-anchoring at profiled prototypes.
pub fn anchored_two_ball(
    rng: &mut ChaCha8Rng,
    max_n: usize,
    d: usize,
    loss: &LossSpec,
) -> Result<Anchored> {
    loop {
        let n = rng.gen_range(4..=max_n.max(4));
        let n1 = rng.gen_range(1..n);
        let delta = rng.gen_range(2.5..8.0);
        let raw = generate_two_ball(&TwoBallConfig {
            n1,
            n2: n - n1,
            radius: 1.0,
            delta,
            layout: Layout::UniformInBall { seed: rng.gen(), d },
        })?;
        let partition = raw.benchmark()?.partition.clone();
        let (protos, value) = profiled_objective(&raw.points, &partition, loss, Feasibility::Free)?;
        let instance = Instance::with_benchmark(raw.points, partition, protos)?;
        let geometry = summarize_geometry(&instance)?;
        if geometry.gamma > 0.0 {
            return Ok(Anchored {
                instance,
                geometry,
                benchmark_value: value,
            });
        }
    }
}

/// Per-instance seeds drawn up front so parallel work is order independent.
fn instance_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen()).collect()
}

/// Squared loss in one or two dimensions, linear loss on the line (its
/// profiled prototypes are exact there).
fn loss_and_dim(rng: &mut ChaCha8Rng) -> (LossSpec, usize) {
    if rng.gen_bool(0.5) {
        (LossSpec::squared(), rng.gen_range(1..=2))
    } else {
        (LossSpec::linear(), 1)
    }
}

/// One enumerated candidate: a partition at its profiled prototypes.
struct Candidate {
    partition: Partition,
    delta: f64,
    eta: f64,
    eta_perm: Vec<usize>,
}

fn candidates(a: &Anchored, loss: &LossSpec) -> Result<(f64, f64, Vec<Candidate>)> {
    let inst = &a.instance;
    let bench = inst.benchmark()?;
    let all = enumerate_profiled(&inst.points, 2, loss, Feasibility::Free)?;
    let opt = all.iter().map(|(_, _, v)| *v).fold(f64::INFINITY, f64::min);
    let rel = |v: f64| {
        if opt > 0.0 {
            (v / opt - 1.0).max(0.0)
        } else if v == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    };
    let delta_approx = rel(a.benchmark_value);
    let mut out = Vec::with_capacity(all.len());
    for (p, protos, v) in all {
        let (eta, eta_perm) = displacement(&protos, &bench.prototypes)?;
        out.push(Candidate {
            partition: p,
            delta: rel(v),
            eta,
            eta_perm,
        });
    }
    Ok((opt, delta_approx, out))
}

fn inputs(a: &Anchored, opt: f64, delta_approx: f64, c: &Candidate) -> BoundInputs {
    BoundInputs {
        opt_n: opt,
        n: a.instance.n(),
        gamma: a.geometry.gamma,
        d_eff: a.geometry.d_eff,
        delta0: a.geometry.delta0,
        eta: c.eta,
        delta: c.delta,
        delta_approx,
    }
}

/// Every partition of every instance, with `eta < gamma`, must satisfy
/// `p <= global bound`.
pub fn bound_soundness_suite(cfg: &SuiteConfig) -> Result<Tally> {
    let parts = instance_seeds(cfg.seed, cfg.instances)
        .into_par_iter()
        .map(|s| -> Result<Tally> {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let (loss, d) = loss_and_dim(&mut rng);
            let a = anchored_two_ball(&mut rng, cfg.max_n, d, &loss)?;
            let star = &a.instance.benchmark()?.partition;
            let (opt, da, cands) = candidates(&a, &loss)?;
            let mut t = Tally::new("bound-soundness");
            t.bump("instances", 1);
            for c in &cands {
                t.bump("partitions", 1);
                if !(c.eta < a.geometry.gamma) {
                    continue;
                }
                let cert = global_bound(&loss, &inputs(&a, opt, da, c))?;
                let (p, _) = misclassification_rate(&c.partition, star)?;
                if p > 0.0 {
                    t.bump("misclassifying-checks", 1);
                }
                t.record(within(p, cert.bound_total), || {
                    format!(
                        "{} loss, labels {:?}: p = {p} > bound {} (delta {}, eta {}, gamma {})",
                        loss.name(),
                        c.partition.labels(),
                        cert.bound_total,
                        c.delta,
                        c.eta,
                        a.geometry.gamma
                    )
                });
            }
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(merged("bound-soundness", parts))
}

/// Core points misassigned under the prototype matching that defines `eta`.
fn core_errors(c: &Candidate, star: &Partition, core: &[usize]) -> usize {
    core.iter()
        .filter(|&&i| c.eta_perm[c.partition.labels()[i]] != star.labels()[i])
        .count()
}

/// Local core bound: measured core errors stay below it, zero-error
/// certificates hold, and the local bound never exceeds the global one on a
/// ten-point depth grid.
pub fn core_belt_suite(cfg: &SuiteConfig) -> Result<Tally> {
    let parts = instance_seeds(cfg.seed, cfg.instances)
        .into_par_iter()
        .map(|s| -> Result<Tally> {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let (loss, d) = loss_and_dim(&mut rng);
            let a = core_belt_instance(&mut rng, cfg.max_n, d, &loss)?;
            let star = a.instance.benchmark()?.partition.clone();
            let (opt, da, cands) = candidates(&a, &loss)?;
            let n = a.instance.n() as f64;
            let mut t = Tally::new("core-belt");
            t.bump("instances", 1);
            for i in 0..10 {
                let s = a.geometry.d_eff * i as f64 / 10.0;
                let core = core_belt(&a.instance, s)?.core_indices;
                for c in cands.iter().filter(|c| c.eta < a.geometry.gamma) {
                    let inp = inputs(&a, opt, da, c);
                    let local = local_core_bound(&loss, &inp, s)?;
                    let global = global_bound(&loss, &inp)?;
                    t.record(local.bound_total <= global.bound_total, || {
                        format!(
                            "depth {s}: local {} > global {}",
                            local.bound_total, global.bound_total
                        )
                    });
                    let errors = core_errors(c, &star, &core);
                    t.record(within(errors as f64 / n, local.bound_total), || {
                        format!(
                            "depth {s}: core errors {errors}/{n} exceed local bound {}",
                            local.bound_total
                        )
                    });
                    if local.zero_error_certified == Some(true) {
                        t.bump("zero-error-certificates", 1);
                        if c.partition.canonical() != star.canonical() {
                            t.bump("zero-error-certificates-off-benchmark", 1);
                        }
                        t.record(errors == 0, || {
                            format!("depth {s}: certified zero-error core has {errors} errors")
                        });
                    }
                }
            }
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(merged("core-belt", parts))
}

/// Two clusters with tight cores and one or two outlying belt points each.
pub fn core_belt_instance(
    rng: &mut ChaCha8Rng,
    max_n: usize,
    d: usize,
    loss: &LossSpec,
) -> Result<Anchored> {
    loop {
        let n = rng.gen_range(6..=max_n.max(6));
        let n1 = rng.gen_range(3..=n - 3);
        let sep = rng.gen_range(2.6..5.0);
        let mut rows = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for (j, m) in [(0usize, n1), (1, n - n1)] {
            let belt = rng.gen_range(1..=2.min(m - 1));
            for i in 0..m {
                let r = if i < belt {
                    rng.gen_range(0.6..=1.0)
                } else {
                    rng.gen_range(0.0..=0.15)
                };
                let mut dir: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-9);
                dir.iter_mut().for_each(|x| *x *= r / norm);
                dir[0] += j as f64 * sep;
                rows.push(dir);
                labels.push(j);
            }
        }
        let points = Points::from_rows(&rows)?;
        let partition = Partition::new(labels, 2)?;
        let (protos, value) = profiled_objective(&points, &partition, loss, Feasibility::Free)?;
        let instance = Instance::with_benchmark(points, partition, protos)?;
        let geometry = summarize_geometry(&instance)?;
        if geometry.gamma > 0.0 {
            return Ok(Anchored {
                instance,
                geometry,
                benchmark_value: value,
            });
        }
    }
}

/// Squared loss with centroid anchors: every candidate with `eta < gamma/2`
/// has `eta <= D_eff sqrt((delta + delta_approx) / c_b)`.
pub fn eta_kmeans_suite(cfg: &SuiteConfig) -> Result<Tally> {
    let loss = LossSpec::squared();
    let parts = instance_seeds(cfg.seed, cfg.instances)
        .into_par_iter()
        .map(|s| -> Result<Tally> {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let d = rng.gen_range(1..=2);
            let a = anchored_two_ball(&mut rng, cfg.max_n, d, &loss)?;
            let (_, da, cands) = candidates(&a, &loss)?;
            let mut t = Tally::new("eta-kmeans");
            t.bump("instances", 1);
            for c in cands.iter().filter(|c| c.eta < a.geometry.gamma / 2.0) {
                let bound =
                    eta_bound_kmeans(a.geometry.d_eff, a.geometry.balance, 1.0, c.delta, da)?;
                if c.eta > 0.0 {
                    t.bump("displaced-candidates", 1);
                }
                t.record(within(c.eta, bound), || {
                    format!(
                        "eta {} exceeds {bound} (delta {}, delta_approx {da})",
                        c.eta, c.delta
                    )
                });
            }
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(merged("eta-kmeans", parts))
}

/// Linear loss over data-restricted prototypes: whenever the medoid
/// certificate fires for a candidate tuple, that tuple sits on the benchmark.
pub fn eta_medoid_suite(cfg: &SuiteConfig) -> Result<Tally> {
    let loss = LossSpec::linear();
    let parts = instance_seeds(cfg.seed, cfg.instances)
        .into_par_iter()
        .map(|s| -> Result<Tally> {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let d = rng.gen_range(1..=2);
            let n = rng.gen_range(4..=cfg.max_n.clamp(4, 9));
            let n1 = rng.gen_range(1..n);
            let raw = generate_two_ball(&TwoBallConfig {
                n1,
                n2: n - n1,
                radius: 1.0,
                delta: rng.gen_range(2.5..8.0),
                layout: Layout::UniformInBall { seed: rng.gen(), d },
            })?;
            let points = raw.points;
            let bench_idx: Vec<usize> = if rng.gen_bool(0.5) {
                let opt = brute_force_opt(&points, 2, &loss, Feasibility::DataRestricted)?;
                opt.prototypes.medoid_indices.clone().unwrap_or_default()
            } else {
                let a = rng.gen_range(0..n);
                let b = (a + rng.gen_range(1..n)) % n;
                vec![a, b]
            };
            let star = Prototypes::medoids(&points, &bench_idx);
            let v_star = {
                let p = best_response_partition(&points, &star)?;
                objective(&points, &p, &star, &loss)?
            };
            let mut values = Vec::new();
            let mut err = None;
            for_each_subset(n, 2, |idx| {
                let protos = Prototypes::medoids(&points, idx);
                match best_response_partition(&points, &protos)
                    .and_then(|p| objective(&points, &p, &protos, &loss))
                {
                    Ok(v) => values.push((idx.to_vec(), v)),
                    Err(e) => err = Some(e),
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            let opt = values.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
            let rel = |v: f64| {
                if opt > 0.0 {
                    (v / opt - 1.0).max(0.0)
                } else {
                    0.0
                }
            };
            let mut t = Tally::new("eta-medoids");
            t.bump("instances", 1);
            for (idx, v) in &values {
                let rep = eta_zero_medoids(&points, &loss, &bench_idx, rel(*v), rel(v_star))?;
                if rep.uniqueness_violated {
                    t.bump("uniqueness-violated", 1);
                }
                if !rep.eta_zero {
                    continue;
                }
                t.bump("eta-zero-certificates", 1);
                let (eta, _) = displacement(&Prototypes::medoids(&points, idx), &star)?;
                t.record(eta == 0.0, || {
                    format!("tuple {idx:?} certified but eta = {eta}")
                });
            }
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(merged("eta-medoids", parts))
}

/// Pairs of enumerated candidates with `eta < gamma`: their Hamming distance
/// stays inside the tube bound.
pub fn tube_suite(cfg: &SuiteConfig) -> Result<Tally> {
    let parts = instance_seeds(cfg.seed, cfg.instances)
        .into_par_iter()
        .map(|s| -> Result<Tally> {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let (loss, d) = loss_and_dim(&mut rng);
            let a = anchored_two_ball(&mut rng, cfg.max_n, d, &loss)?;
            let (opt, da, cands) = candidates(&a, &loss)?;
            let near: Vec<&Candidate> = cands.iter().filter(|c| c.eta < a.geometry.gamma).collect();
            let n = a.instance.n() as f64;
            let mut t = Tally::new("hamming-tube");
            t.bump("instances", 1);
            for (i, c1) in near.iter().enumerate() {
                for c2 in &near[i..] {
                    let tube = hamming_tube_bound(
                        &loss,
                        &TubeInputs {
                            opt_n: opt,
                            n: a.instance.n(),
                            gamma: a.geometry.gamma,
                            d_eff: a.geometry.d_eff,
                            delta0: a.geometry.delta0,
                            delta_approx: da,
                            delta1: c1.delta,
                            delta2: c2.delta,
                            eta1: c1.eta,
                            eta2: c2.eta,
                        },
                    )?;
                    let dist = mismatch_count(&c1.partition, &c2.partition)? as f64 / n;
                    t.record(within(dist, tube.bound), || {
                        format!("d_Ham {dist} exceeds tube bound {}", tube.bound)
                    });
                }
            }
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(merged("hamming-tube", parts))
}

fn random_partition(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Result<Partition> {
    let labels = (0..n).map(|_| rng.gen_range(0..k)).collect();
    Partition::new(labels, k)
}

/// Identity, symmetry and the triangle inequality of the label-invariant
/// Hamming distance on random partition triples.
pub fn hamming_metric_fuzz(triples: usize, seed: u64) -> Result<Tally> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new("hamming-metric");
    for _ in 0..triples {
        let n = rng.gen_range(1..=12);
        let k = rng.gen_range(1..=4);
        let a = random_partition(&mut rng, n, k)?;
        let b = random_partition(&mut rng, n, k)?;
        let c = random_partition(&mut rng, n, k)?;
        let ab = mismatch_count(&a, &b)?;
        let ba = mismatch_count(&b, &a)?;
        let bc = mismatch_count(&b, &c)?;
        let ac = mismatch_count(&a, &c)?;
        let aa = mismatch_count(&a, &a)?;
        t.record(ac <= ab + bc && ab == ba && aa == 0, || {
            format!(
                "labels {:?} {:?} {:?}: d(a,c) = {ac}, d(a,b) = {ab}, d(b,a) = {ba}, d(b,c) = {bc}",
                a.labels(),
                b.labels(),
                c.labels()
            )
        });
    }
    Ok(t)
}

/// Closed-form increments against the infimum over an `r`-grid on `[0, D]`.
pub fn increment_closed_form_suite(cases: usize, grid: usize, seed: u64) -> Result<Tally> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<(f64, f64, f64)> = (0..cases)
        .map(|_| {
            (
                rng.gen_range(1e-3..10.0),
                rng.gen_range(1e-3..10.0),
                rng.gen_range(1e-2..10.0),
            )
        })
        .collect();
    let parts = draws
        .into_par_iter()
        .map(|(gamma, d, tau)| -> Result<Tally> {
            let mut t = Tally::new("increment-closed-form");
            for loss in [
                LossSpec::squared(),
                LossSpec::linear(),
                LossSpec::huber(tau)?,
            ] {
                let closed = loss.increment(gamma, d)?;
                let mut inf = f64::INFINITY;
                for i in 0..grid {
                    let r = d * i as f64 / (grid - 1) as f64;
                    inf = inf.min(loss.eval(r + gamma)? - loss.eval(r)?);
                }
                let err = (closed - inf).abs();
                let ok = match loss.name() {
                    "squared" => err <= 1e-9 * inf.abs(),
                    _ => err <= 1e-9,
                };
                t.record(ok, || {
                    format!(
                        "{} (gamma {gamma}, D {d}, tau {tau}): closed {closed} vs grid {inf}",
                        loss.name()
                    )
                });
            }
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(merged("increment-closed-form", parts))
}

/// Relative tolerance of the Huber/squared condition-number coincidence.
pub const HUBER_KAPPA_TOLERANCE: f64 = 1e-12;

/// `kappa` closed forms for squared and linear loss, and the Huber curve at
/// `tau = 2 D_eff` coinciding with the squared one for `gamma <= 2 D_eff`.
pub fn kappa_identity_suite(cases: usize, seed: u64) -> Result<Tally> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new("kappa-identities");
    for _ in 0..cases {
        let d = rng.gen_range(1e-2..10.0);
        let gamma: f64 = rng.gen_range(1e-6..=2.0 * d);
        let sq = condition_number(&LossSpec::squared(), gamma, d)?.value;
        let lin = condition_number(&LossSpec::linear(), gamma, d)?.value;
        let hub = condition_number(&LossSpec::huber(2.0 * d)?, gamma, d)?.value;
        let expect = (d / gamma).powi(2);
        t.record(sq == expect, || format!("squared kappa {sq} != {expect}"));
        t.record(lin == d / gamma, || {
            format!("linear kappa {lin} != {}", d / gamma)
        });
        t.record((hub - sq).abs() <= HUBER_KAPPA_TOLERANCE * sq, || {
            format!("huber kappa {hub} vs squared {sq} at D {d}, gamma {gamma}")
        });
    }
    Ok(t)
}

/// Results of the default verification suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub suites: Vec<Tally>,
    pub total_cases: u64,
    pub total_violations: u64,
}

impl OracleSummary {
    pub fn from_suites(suites: Vec<Tally>) -> Self {
        Self {
            total_cases: suites.iter().map(|t| t.cases).sum(),
            total_violations: suites.iter().map(|t| t.violations).sum(),
            suites,
        }
    }

    pub fn passed(&self) -> bool {
        self.total_violations == 0
    }
}

/// Every suite at its default size.
pub fn run_default_suite(seed: u64) -> Result<OracleSummary> {
    let cfg = SuiteConfig {
        seed,
        ..Default::default()
    };
    let small = SuiteConfig {
        instances: 60,
        ..cfg.clone()
    };
    Ok(OracleSummary::from_suites(vec![
        increment_closed_form_suite(1000, 10_000, seed)?,
        kappa_identity_suite(1000, seed)?,
        bound_soundness_suite(&cfg)?,
        core_belt_suite(&small)?,
        eta_kmeans_suite(&cfg)?,
        eta_medoid_suite(&small)?,
        tube_suite(&small)?,
        hamming_metric_fuzz(10_000, seed)?,
        merge_penalty_fuzz(1000, seed)?,
        mixing_coefficient_exhaustive(20)?,
    ]))
}
