//! Data-driven certificate from observable proxies, and Lipschitz checks for
//! partition functionals.
//!
//! The diagnostic replaces the benchmark geometry by the candidate's own:
//! `D^` (largest or high-quantile within-cluster radius), `Delta^` (closest
//! prototype pair), `gamma^ = (Delta^ - 2 D^)_+`, then shrinks the margin by the
//! guard `alpha` and multiplies the resulting condition number by the
//! restart-spread gap proxy `delta^`. The gap proxy is not a certified upper
//! bound on the true gap.

use super::kappa_value;
use crate::clustering::SolveResult;
use crate::error::{domain, precondition, Error, Result};
use crate::geometry::{distance, min_separation, Points, Prototypes};
use crate::loss::LossSpec;
use crate::partition::{align, misclassification_rate, Partition};
use serde::{Deserialize, Serialize};

/// How the proxy radius `D^` is formed from within-cluster radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum RadiusMode {
    Max,
    /// Per-cluster nearest-rank `q`-quantile, then the maximum over clusters.
    Quantile {
        q: f64,
    },
}

impl RadiusMode {
    pub fn q95() -> Self {
        Self::Quantile { q: 0.95 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityEntry {
    pub alpha: f64,
    #[serde(with = "crate::real")]
    pub kappa_hat: f64,
    #[serde(with = "crate::real")]
    pub p_cert: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub d_hat: f64,
    pub delta_hat_sep: f64,
    pub gamma_hat: f64,
    pub alpha: f64,
    #[serde(with = "crate::real")]
    pub kappa_hat: f64,
    #[serde(with = "crate::real")]
    pub delta_hat_gap: f64,
    #[serde(with = "crate::real")]
    pub p_cert: f64,
    pub vacuous: bool,
    pub radius_mode: RadiusMode,
    /// Quantile radii give a trimmed certificate outside the theory's scope.
    pub trimmed: bool,
    pub candidate_restart: usize,
    pub candidate_objective: f64,
    pub best_restart_objective: f64,
    pub restarts: usize,
    pub sensitivity: Vec<SensitivityEntry>,
}

/// Guard values always reported in the sensitivity table.
pub const SENSITIVITY_ALPHAS: [f64; 2] = [0.1, 0.2];

fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let m = sorted.len();
    let rank = ((q * m as f64).ceil() as usize).clamp(1, m);
    sorted[rank - 1]
}

fn proxy_radius(
    points: &Points,
    partition: &Partition,
    protos: &Prototypes,
    mode: RadiusMode,
) -> Result<f64> {
    let mut per_cluster: Vec<Vec<f64>> = vec![Vec::new(); partition.k()];
    for (x, &j) in points.rows().zip(partition.labels()) {
        per_cluster[j].push(distance(x, protos.get(j)));
    }
    match mode {
        RadiusMode::Max => Ok(per_cluster.iter().flatten().copied().fold(0.0, f64::max)),
        RadiusMode::Quantile { q } => {
            if !(q > 0.0 && q <= 1.0) {
                return domain(format!("radius quantile must lie in (0, 1], got {q}"));
            }
            let mut best: f64 = 0.0;
            for mut radii in per_cluster.into_iter().filter(|r| !r.is_empty()) {
                radii.sort_by(|a, b| a.total_cmp(b));
                best = best.max(nearest_rank(&radii, q));
            }
            Ok(best)
        }
    }
}

fn guarded_kappa(loss: &LossSpec, gamma_hat: f64, alpha: f64, d_hat: f64) -> Result<f64> {
    if !(gamma_hat > 0.0) {
        return Ok(f64::INFINITY);
    }
    Ok(kappa_value(loss, (1.0 - alpha) * gamma_hat, d_hat, d_hat)?.0)
}

fn certificate(kappa: f64, delta: f64) -> f64 {
    if kappa.is_finite() && delta.is_finite() {
        kappa * delta
    } else {
        f64::INFINITY
    }
}

/// Runs the four-step diagnostic on a multi-start solve. The candidate is
/// the best restart unless `candidate` names another restart index.
pub fn diagnose(
    points: &Points,
    solve: &SolveResult,
    loss: &LossSpec,
    alpha: f64,
    radius_mode: RadiusMode,
    candidate: Option<usize>,
) -> Result<DiagnosticReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("guard alpha must lie in (0, 1), got {alpha}"));
    }
    let restarts = solve.per_restart_objectives.len();
    if restarts < 2 {
        return precondition(format!(
            "the restart gap proxy needs at least 2 restarts, got {restarts}"
        ));
    }
    let (idx, partition, protos, objective) = match candidate {
        None => (
            solve.best_restart,
            &solve.partition,
            &solve.prototypes,
            solve.objective,
        ),
        Some(r) => {
            let run = solve.runs.get(r).ok_or_else(|| {
                Error::Precondition(format!("restart {r} is not recorded in the solve result"))
            })?;
            (r, &run.partition, &run.prototypes, run.objective)
        }
    };
    let d_hat = proxy_radius(points, partition, protos, radius_mode)?;
    let sep = min_separation(protos)?;
    let gamma_hat = (sep - 2.0 * d_hat).max(0.0);
    let best = solve
        .per_restart_objectives
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let delta_hat = if best == 0.0 {
        if objective == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        ((objective - best) / best).max(0.0)
    };
    let kappa_hat = guarded_kappa(loss, gamma_hat, alpha, d_hat)?;
    let p_cert = certificate(kappa_hat, delta_hat);
    let sensitivity = SENSITIVITY_ALPHAS
        .iter()
        .map(|&a| {
            let k = guarded_kappa(loss, gamma_hat, a, d_hat)?;
            Ok(SensitivityEntry {
                alpha: a,
                kappa_hat: k,
                p_cert: certificate(k, delta_hat),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DiagnosticReport {
        d_hat,
        delta_hat_sep: sep,
        gamma_hat,
        alpha,
        kappa_hat,
        delta_hat_gap: delta_hat,
        p_cert,
        vacuous: !p_cert.is_finite(),
        radius_mode,
        trimmed: matches!(radius_mode, RadiusMode::Quantile { .. }),
        candidate_restart: idx,
        candidate_objective: objective,
        best_restart_objective: best,
        restarts,
        sensitivity,
    })
}

/// A partition summary with a declared Lipschitz constant with respect to
/// the label-invariant Hamming distance (L1 norm on the output).
#[derive(Debug, Clone)]
pub struct DownstreamFunctional {
    pub name: String,
    pub lipschitz_constant: f64,
    pub evaluator: fn(&Partition) -> Vec<f64>,
}

fn size_proportions(p: &Partition) -> Vec<f64> {
    let n = p.n() as f64;
    p.sizes().into_iter().map(|s| s as f64 / n).collect()
}

/// Cluster-size proportions; moving one point changes two entries by `1/n`.
pub fn cluster_size_proportions() -> DownstreamFunctional {
    DownstreamFunctional {
        name: "cluster-size-proportions".into(),
        lipschitz_constant: 2.0,
        evaluator: size_proportions,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DownstreamCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub p: f64,
    pub holds: bool,
}

/// Checks `|T(hat) - T(star)|_1 <= L_T p(hat, star)` after aligning `hat`.
pub fn downstream_check(
    f: &DownstreamFunctional,
    hat: &Partition,
    star: &Partition,
) -> Result<DownstreamCheck> {
    let (p, _) = misclassification_rate(hat, star)?;
    let aligned = align(hat, star)?;
    let a = (f.evaluator)(&aligned);
    let b = (f.evaluator)(star);
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: b.len(),
            got: a.len(),
        });
    }
    let lhs: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
    let rhs = f.lipschitz_constant * p;
    Ok(DownstreamCheck {
        lhs,
        rhs,
        p,
        holds: lhs <= rhs + 1e-12,
    })
}
