//! Drift simulation for the tracking certificate.
//!
//! Each step regenerates the dataset around drifted anchors with the same
//! within-ball offsets, warm-starts Lloyd from the previous prototypes and
//! compares the measured misclassification with the tracking bound computed
//! from an exact per-step optimum.

use crate::certify::{tracking_bound, TrackingInputs};
use crate::clustering::{
    brute_force_opt, displacement, hausdorff_drift, lloyd, lloyd_warm_start, objective, LloydConfig,
};
use crate::error::{domain, Error, Result};
use crate::geometry::{summarize_geometry, Feasibility, Instance, Points, Prototypes};
use crate::loss::LossSpec;
use crate::partition::{misclassification_rate, Partition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The slow-drift scenario shipped with the crate.
pub const SLOW_DRIFT_SCENARIO: &str = include_str!("../scenarios/slow_drift.json");

/// A one-step anchor jump on top of the linear trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spike {
    pub step: usize,
    pub cluster: usize,
    pub offset: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftScenario {
    pub name: String,
    pub steps: usize,
    pub loss: LossSpec,
    /// Radius of the balls holding the within-cluster offsets.
    pub radius: f64,
    pub cluster_sizes: Vec<usize>,
    /// Anchor positions at step 0.
    pub anchors: Vec<Vec<f64>>,
    /// Per-step anchor displacement.
    pub velocity: Vec<Vec<f64>>,
    pub seed: u64,
    #[serde(default)]
    pub spikes: Vec<Spike>,
    /// Restarts of the cold-start comparison run (and of the step-0 solve).
    #[serde(default = "default_cold_restarts")]
    pub cold_restarts: usize,
}

fn default_cold_restarts() -> usize {
    8
}

impl DriftScenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text)
            .map_err(|e| Error::Domain(format!("invalid scenario: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn slow_drift() -> Self {
        Self::from_json(SLOW_DRIFT_SCENARIO).expect("shipped scenario is valid")
    }

    pub fn validate(&self) -> Result<()> {
        self.loss.validate()?;
        let k = self.anchors.len();
        if k < 2 {
            return domain("a drift scenario needs at least two anchors");
        }
        if self.steps == 0 {
            return domain("a drift scenario needs at least one step");
        }
        if !(self.radius >= 0.0 && self.radius.is_finite()) {
            return domain("radius must be finite and non-negative");
        }
        if self.cluster_sizes.len() != k || self.velocity.len() != k {
            return domain("anchors, velocity and cluster_sizes must have one entry per cluster");
        }
        if self.cluster_sizes.contains(&0) {
            return domain("every cluster needs at least one point");
        }
        let d = self.anchors[0].len();
        if d == 0
            || self
                .anchors
                .iter()
                .chain(&self.velocity)
                .any(|v| v.len() != d)
        {
            return domain("anchors and velocities must share one positive dimension");
        }
        for s in &self.spikes {
            if s.cluster >= k || s.offset.len() != d || s.step >= self.steps {
                return domain(format!(
                    "spike at step {} is inconsistent with the scenario",
                    s.step
                ));
            }
        }
        Ok(())
    }

    fn dim(&self) -> usize {
        self.anchors[0].len()
    }

    fn anchors_at(&self, t: usize) -> Vec<Vec<f64>> {
        let mut a: Vec<Vec<f64>> = self
            .anchors
            .iter()
            .zip(&self.velocity)
            .map(|(a, v)| a.iter().zip(v).map(|(x, dx)| x + t as f64 * dx).collect())
            .collect();
        for s in self.spikes.iter().filter(|s| s.step == t) {
            for (x, o) in a[s.cluster].iter_mut().zip(&s.offset) {
                *x += o;
            }
        }
        a
    }

    fn offsets(&self) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let d = self.dim();
        let total: usize = self.cluster_sizes.iter().sum();
        (0..total)
            .map(|_| loop {
                let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
                    break v.into_iter().map(|x| x * self.radius).collect();
                }
            })
            .collect()
    }

    /// The step-`t` instance with the anchors as benchmark prototypes.
    pub fn instance_at(&self, t: usize) -> Result<Instance> {
        let anchors = self.anchors_at(t);
        let offsets = self.offsets();
        let mut rows = Vec::with_capacity(offsets.len());
        let mut labels = Vec::with_capacity(offsets.len());
        let mut it = offsets.iter();
        for (j, &m) in self.cluster_sizes.iter().enumerate() {
            for o in it.by_ref().take(m) {
                rows.push(
                    anchors[j]
                        .iter()
                        .zip(o)
                        .map(|(a, b)| a + b)
                        .collect::<Vec<f64>>(),
                );
                labels.push(j);
            }
        }
        let k = anchors.len();
        Instance::with_benchmark(
            Points::from_rows(&rows)?,
            Partition::new(labels, k)?,
            Prototypes::from_rows(&anchors)?,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepLog {
    pub t: usize,
    pub eta_alg: f64,
    pub eta_drift: f64,
    pub eta_total: f64,
    /// Displacement of the warm-started prototypes from the current anchors.
    pub eta_measured: f64,
    /// `eta_measured <= eta_alg + eta_drift`.
    pub triangle_holds: bool,
    pub gamma_t: f64,
    pub d_t: f64,
    #[serde(with = "crate::real")]
    pub kappa_t: f64,
    pub delta_t: f64,
    pub delta_approx_t: f64,
    pub p_t: f64,
    #[serde(with = "crate::real")]
    pub bound_t: f64,
    #[serde(with = "crate::real")]
    pub bound_exact_form: f64,
    pub vacuous: bool,
    /// `p_t <= bound_t`; always true on vacuous steps.
    pub within_bound: bool,
    pub opt_value: f64,
    pub warm_objective: f64,
    pub cold_objective: f64,
}

/// Slack on the triangle comparison, relative to the displacement scale.
const TRIANGLE_TOLERANCE: f64 = 1e-12;

/// Runs the scenario step by step. Step 0 is solved cold and measured against
/// its own anchors (no drift); later steps warm-start from the previous step.
pub fn run_tracking(scenario: &DriftScenario) -> Result<Vec<StepLog>> {
    scenario.validate()?;
    let loss = &scenario.loss;
    let k = scenario.anchors.len();
    let warm_cfg = LloydConfig {
        restarts: 1,
        seed: scenario.seed,
        ..Default::default()
    };
    let cold_cfg = LloydConfig {
        restarts: scenario.cold_restarts.max(1),
        seed: scenario.seed,
        ..Default::default()
    };
    let mut logs = Vec::with_capacity(scenario.steps);
    let mut prev_protos: Option<Prototypes> = None;
    let mut prev_anchors: Option<Prototypes> = None;
    for t in 0..scenario.steps {
        let inst = scenario.instance_at(t)?;
        let bench = inst.benchmark()?.clone();
        let geo = summarize_geometry(&inst)?;
        let cold = lloyd(&inst.points, k, loss, &cold_cfg)?;
        let solve = match &prev_protos {
            Some(p) => lloyd_warm_start(&inst.points, p, loss, &warm_cfg)?,
            None => cold.clone(),
        };
        let reference = prev_anchors
            .clone()
            .unwrap_or_else(|| bench.prototypes.clone());
        let (eta_alg, _) = displacement(&solve.prototypes, &reference)?;
        let eta_drift = hausdorff_drift(&bench.prototypes, &reference)?;
        let (eta_measured, _) = displacement(&solve.prototypes, &bench.prototypes)?;
        let opt = brute_force_opt(&inst.points, k, loss, Feasibility::Free)?;
        let bench_value = objective(&inst.points, &bench.partition, &bench.prototypes, loss)?;
        let rel = |v: f64| {
            if opt.objective > 0.0 {
                (v / opt.objective - 1.0).max(0.0)
            } else if v == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        };
        let delta_t = rel(solve.objective);
        let delta_approx_t = rel(bench_value);
        let cert = tracking_bound(
            loss,
            &TrackingInputs {
                gamma_t: geo.gamma,
                d_t: geo.d_eff,
                delta0_t: geo.delta0,
                eta_alg,
                eta_drift,
                delta_t,
                delta_approx_t,
                opt_per_point: opt.objective / inst.n() as f64,
            },
        )?;
        let (p_t, _) = misclassification_rate(&solve.partition, &bench.partition)?;
        let total = eta_alg + eta_drift;
        logs.push(StepLog {
            t,
            eta_alg,
            eta_drift,
            eta_total: cert.eta_total,
            eta_measured,
            triangle_holds: eta_measured <= total + TRIANGLE_TOLERANCE * total.max(1.0),
            gamma_t: geo.gamma,
            d_t: geo.d_eff,
            kappa_t: cert.kappa_t,
            delta_t,
            delta_approx_t,
            p_t,
            bound_t: cert.bound,
            bound_exact_form: cert.bound_exact_form,
            vacuous: cert.vacuous,
            within_bound: cert.vacuous || p_t <= cert.bound,
            opt_value: opt.objective,
            warm_objective: solve.objective,
            cold_objective: cold.objective,
        });
        prev_protos = Some(solve.prototypes);
        prev_anchors = Some(bench.prototypes);
    }
    Ok(logs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_scenario_parses() {
        let s = DriftScenario::slow_drift();
        assert_eq!(s.steps, 20);
        assert_eq!(s.cluster_sizes.iter().sum::<usize>(), 10);
        let a = s.instance_at(3).unwrap();
        let b = s.instance_at(3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_drift_is_stable() {
        let mut s = DriftScenario::slow_drift();
        s.steps = 4;
        s.velocity = vec![vec![0.0, 0.0]; 2];
        let logs = run_tracking(&s).unwrap();
        for l in &logs {
            assert_eq!(l.eta_drift, 0.0);
            assert_eq!(l.p_t, 0.0);
            assert!(l.within_bound);
        }
    }

    #[test]
    fn spike_makes_step_vacuous() {
        let mut s = DriftScenario::slow_drift();
        s.steps = 4;
        s.spikes = vec![Spike {
            step: 2,
            cluster: 1,
            offset: vec![-3.5, 0.0],
        }];
        let logs = run_tracking(&s).unwrap();
        assert!(logs[2].vacuous);
        assert!(logs[2].eta_total >= logs[2].gamma_t);
    }

    #[test]
    fn inconsistent_scenarios_are_rejected() {
        let mut s = DriftScenario::slow_drift();
        s.velocity.pop();
        assert!(s.validate().is_err());
        assert!(DriftScenario::from_json("{}").is_err());
    }
}
