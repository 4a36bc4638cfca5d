//! Condition numbers and misclassification certificates.
//!
//! The primary certificate is the exact bound
//!
//! ```text
//! p <= OPT_n / (n inc(gamma - eta; D_eff)) * (delta + delta_approx)
//!      + L_g eta / inc(gamma - eta; D_eff)
//! ```
//!
//! with `L_g` a Lipschitz constant of the loss on `[0, D_eff + Delta0]`. The
//! condition-number forms replace `OPT_n / n` by its upper bound `g(D_eff)`.
//! A certificate is vacuous (all terms `+inf`) when `eta >= gamma`, when the
//! effective increment is not positive, or when a gap is infinite.

mod diagnose;
mod medoids;

pub use diagnose::{
    cluster_size_proportions, diagnose, downstream_check, DiagnosticReport, DownstreamCheck,
    DownstreamFunctional, RadiusMode, SensitivityEntry,
};
pub use medoids::{eta_zero_medoids, MedoidEtaReport};

use crate::clustering::GapReport;
use crate::error::{domain, Result};
use crate::geometry::GeometrySummary;
use crate::loss::{LossKind, LossSpec};
use serde::{Deserialize, Serialize};

/// `kappa = g(D_eff) / inc(gamma; D_eff)`, `+inf` when the increment vanishes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionNumber {
    #[serde(with = "crate::real")]
    pub value: f64,
    pub gamma_used: f64,
    pub d_eff_used: f64,
    pub increment_used: f64,
}

impl ConditionNumber {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// `g(scale_radius) / inc(margin; radius)` with the closed forms of the
/// convex families (their increment does not depend on the radius).
pub(crate) fn kappa_value(
    loss: &LossSpec,
    margin: f64,
    radius: f64,
    scale_radius: f64,
) -> Result<(f64, f64)> {
    if !(margin > 0.0) {
        return Ok((f64::INFINITY, 0.0));
    }
    let inc = loss.increment(margin, radius)?;
    if !(inc > 0.0) {
        return Ok((f64::INFINITY, inc));
    }
    let value = match &loss.kind {
        LossKind::Squared => (scale_radius / margin).powi(2),
        LossKind::Linear => scale_radius / margin,
        _ => loss.eval(scale_radius)? / inc,
    };
    Ok((value, inc))
}

pub fn condition_number(loss: &LossSpec, gamma: f64, d_eff: f64) -> Result<ConditionNumber> {
    if !(d_eff >= 0.0) {
        return domain(format!("D_eff must be non-negative, got {d_eff}"));
    }
    if gamma.is_nan() {
        return domain("gamma is NaN");
    }
    let (value, inc) = kappa_value(loss, gamma, d_eff, d_eff)?;
    Ok(ConditionNumber {
        value,
        gamma_used: gamma,
        d_eff_used: d_eff,
        increment_used: inc,
    })
}

/// Ingredients of a single-solution certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub opt_n: f64,
    pub n: usize,
    pub gamma: f64,
    pub d_eff: f64,
    /// Benchmark separation; fixes the Lipschitz domain `[0, D_eff + Delta0]`.
    pub delta0: f64,
    pub eta: f64,
    #[serde(with = "crate::real")]
    pub delta: f64,
    #[serde(with = "crate::real")]
    pub delta_approx: f64,
}

impl BoundInputs {
    pub fn from_parts(geo: &GeometrySummary, gaps: &GapReport, eta: f64) -> Self {
        Self {
            opt_n: gaps.opt_value,
            n: geo.n,
            gamma: geo.gamma,
            d_eff: geo.d_eff,
            delta0: geo.delta0,
            eta,
            delta: gaps.delta,
            delta_approx: gaps.delta_approx,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return domain("certificate needs n >= 1");
        }
        for (name, v) in [
            ("OPT_n", self.opt_n),
            ("D_eff", self.d_eff),
            ("Delta0", self.delta0),
            ("eta", self.eta),
            ("delta", self.delta),
            ("delta_approx", self.delta_approx),
        ] {
            if !(v >= 0.0) {
                return domain(format!("{name} must be non-negative, got {v}"));
            }
        }
        if self.gamma.is_nan() {
            return domain("gamma is NaN");
        }
        Ok(())
    }

    fn lipschitz_domain(&self) -> f64 {
        self.d_eff + self.delta0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Condition number at the nominal margin (no displacement).
    pub kappa: ConditionNumber,
    /// `g(D_eff) / inc` at the displaced margin actually used by the bound.
    #[serde(with = "crate::real")]
    pub kappa_effective: f64,
    #[serde(with = "crate::real")]
    pub delta: f64,
    #[serde(with = "crate::real")]
    pub delta_approx: f64,
    pub eta: f64,
    pub l_g: f64,
    pub opt_per_point: f64,
    /// Margin and radius fed to the increment.
    pub effective_margin: f64,
    pub effective_radius: f64,
    pub effective_increment: f64,
    /// `inc(nominal margin) / inc(effective margin)`: the realized constant
    /// relating the condition-number form to the exact bound.
    #[serde(with = "crate::real")]
    pub increment_ratio: f64,
    #[serde(with = "crate::real")]
    pub bound_optimization_term: f64,
    #[serde(with = "crate::real")]
    pub bound_displacement_term: f64,
    #[serde(with = "crate::real")]
    pub bound_total: f64,
    /// `min(bound_total, 1)`.
    #[serde(with = "crate::real")]
    pub bound_reported: f64,
    /// `kappa_effective * (delta + delta_approx) + displacement term`; an
    /// upper bound on `bound_total` since `OPT_n / n <= g(D_eff)`.
    #[serde(with = "crate::real")]
    pub kappa_form_bound: f64,
    pub vacuous: bool,
    /// Core depth for local certificates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_s: Option<f64>,
    /// Local certificates: bound strictly below `1/n`, by at least the
    /// relative guard [`ZERO_ERROR_GUARD`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_error_certified: Option<bool>,
}

/// Relative margin below `1/n` required for a zero-error certificate, so a
/// bound equal to `1/n` in exact arithmetic is not certified after rounding.
pub const ZERO_ERROR_GUARD: f64 = 1e-9;

/// Loss-dependent pieces of a certificate.
struct Envelope {
    kappa: ConditionNumber,
    kappa_effective: f64,
    nominal_increment: f64,
    effective_increment: f64,
    l_g: f64,
}

fn assemble(
    inputs: &BoundInputs,
    env: Envelope,
    margin: f64,
    radius: f64,
    depth: Option<f64>,
) -> Certificate {
    let delta_sum = inputs.delta + inputs.delta_approx;
    let inc = env.effective_increment;
    let vacuous = !(inputs.eta < inputs.gamma) || !(inc > 0.0) || !delta_sum.is_finite();
    let (opt_term, disp_term) = if vacuous {
        (f64::INFINITY, f64::INFINITY)
    } else {
        (
            inputs.opt_n / (inputs.n as f64 * inc) * delta_sum,
            env.l_g * inputs.eta / inc,
        )
    };
    let total = opt_term + disp_term;
    let kappa_form_bound = if vacuous {
        f64::INFINITY
    } else {
        condition_number_bound(
            env.kappa_effective,
            inputs.delta,
            inputs.delta_approx,
            disp_term,
        )
    };
    Certificate {
        kappa: env.kappa,
        kappa_effective: if vacuous {
            f64::INFINITY
        } else {
            env.kappa_effective
        },
        delta: inputs.delta,
        delta_approx: inputs.delta_approx,
        eta: inputs.eta,
        l_g: env.l_g,
        opt_per_point: inputs.opt_n / inputs.n as f64,
        effective_margin: margin,
        effective_radius: radius,
        effective_increment: inc,
        increment_ratio: if inc > 0.0 {
            env.nominal_increment / inc
        } else {
            f64::INFINITY
        },
        bound_optimization_term: opt_term,
        bound_displacement_term: disp_term,
        bound_total: total,
        bound_reported: total.min(1.0),
        kappa_form_bound,
        vacuous,
        depth_s: depth,
        zero_error_certified: depth
            .map(|_| !vacuous && total * (inputs.n as f64) < 1.0 - ZERO_ERROR_GUARD),
    }
}

fn single_loss_envelope(
    loss: &LossSpec,
    inputs: &BoundInputs,
    nominal_margin: f64,
    margin: f64,
    radius: f64,
) -> Result<Envelope> {
    let (k_nom, inc_nom) = kappa_value(loss, nominal_margin, radius, inputs.d_eff)?;
    let (k_eff, inc_eff) = kappa_value(loss, margin.max(0.0), radius, inputs.d_eff)?;
    Ok(Envelope {
        kappa: ConditionNumber {
            value: k_nom,
            gamma_used: nominal_margin,
            d_eff_used: inputs.d_eff,
            increment_used: inc_nom,
        },
        kappa_effective: k_eff,
        nominal_increment: inc_nom,
        effective_increment: inc_eff,
        l_g: loss.lipschitz_bound(inputs.lipschitz_domain())?,
    })
}

/// The exact global certificate for one candidate solution.
pub fn global_bound(loss: &LossSpec, inputs: &BoundInputs) -> Result<Certificate> {
    inputs.validate()?;
    let margin = inputs.gamma - inputs.eta;
    let env = single_loss_envelope(loss, inputs, inputs.gamma, margin, inputs.d_eff)?;
    Ok(assemble(inputs, env, margin, inputs.d_eff, None))
}

/// `kappa * (delta + delta_approx) + displacement_term`, `+inf` for infinite
/// `kappa`.
pub fn condition_number_bound(
    kappa: f64,
    delta: f64,
    delta_approx: f64,
    displacement_term: f64,
) -> f64 {
    if !kappa.is_finite() {
        return f64::INFINITY;
    }
    kappa * (delta + delta_approx) + displacement_term
}

/// Certificate for misclassifications inside the depth-`s` core: margin
/// `gamma - eta + 2s`, radius `D_eff - s`.
pub fn local_core_bound(loss: &LossSpec, inputs: &BoundInputs, s: f64) -> Result<Certificate> {
    inputs.validate()?;
    if !(s >= 0.0) || (s > 0.0 && s >= inputs.d_eff) {
        return domain(format!(
            "core depth must lie in [0, D_eff) = [0, {}), got {s}",
            inputs.d_eff
        ));
    }
    let margin = inputs.gamma - inputs.eta + 2.0 * s;
    let radius = inputs.d_eff - s;
    let env = single_loss_envelope(loss, inputs, inputs.gamma + 2.0 * s, margin, radius)?;
    Ok(assemble(inputs, env, margin, radius, Some(s)))
}

/// Displacement bound for k-means: `D_eff sqrt((delta + delta_approx) / (c_qg c_b))`.
pub fn eta_bound_kmeans(
    d_eff: f64,
    c_b: f64,
    c_qg: f64,
    delta: f64,
    delta_approx: f64,
) -> Result<f64> {
    if !(c_b > 0.0) || !(c_qg > 0.0) {
        return domain(format!(
            "c_b and c_qg must be positive, got {c_b} and {c_qg}"
        ));
    }
    if !(d_eff >= 0.0) || !(delta >= 0.0) || !(delta_approx >= 0.0) {
        return domain("D_eff and the gaps must be non-negative");
    }
    Ok(d_eff * ((delta + delta_approx) / (c_qg * c_b)).sqrt())
}

/// Inputs of the Hamming tube bound for two near-optimal solutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeInputs {
    pub opt_n: f64,
    pub n: usize,
    pub gamma: f64,
    pub d_eff: f64,
    pub delta0: f64,
    pub delta_approx: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub eta1: f64,
    pub eta2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeBound {
    #[serde(with = "crate::real")]
    pub bound: f64,
    #[serde(with = "crate::real")]
    pub optimization_term: f64,
    #[serde(with = "crate::real")]
    pub displacement_term: f64,
    /// `2 kappa(gamma - eta_max) (delta + delta_approx) + displacement term`.
    #[serde(with = "crate::real")]
    pub kappa_form_bound: f64,
    pub vacuous: bool,
}

/// Bound on `d_Ham` between two `(1 + max(delta1, delta2))`-near-optimal
/// solutions with displacements `eta1`, `eta2`.
pub fn hamming_tube_bound(loss: &LossSpec, t: &TubeInputs) -> Result<TubeBound> {
    let eta_max = t.eta1.max(t.eta2);
    let delta = t.delta1.max(t.delta2);
    let probe = BoundInputs {
        opt_n: t.opt_n,
        n: t.n,
        gamma: t.gamma,
        d_eff: t.d_eff,
        delta0: t.delta0,
        eta: eta_max,
        delta,
        delta_approx: t.delta_approx,
    };
    probe.validate()?;
    if !(t.eta1 >= 0.0 && t.eta2 >= 0.0) {
        return domain("displacements must be non-negative");
    }
    let margin = t.gamma - eta_max;
    let (kappa_eff, inc) = kappa_value(loss, margin.max(0.0), t.d_eff, t.d_eff)?;
    let l_g = loss.lipschitz_bound(t.d_eff + t.delta0)?;
    let delta_sum = delta + t.delta_approx;
    let vacuous = !(eta_max < t.gamma) || !(inc > 0.0) || !delta_sum.is_finite();
    if vacuous {
        return Ok(TubeBound {
            bound: f64::INFINITY,
            optimization_term: f64::INFINITY,
            displacement_term: f64::INFINITY,
            kappa_form_bound: f64::INFINITY,
            vacuous,
        });
    }
    let opt_term = 2.0 * (t.opt_n / (t.n as f64 * inc)) * delta_sum;
    let disp = l_g * (t.eta1 + t.eta2) / inc;
    Ok(TubeBound {
        bound: opt_term + disp,
        optimization_term: opt_term,
        displacement_term: disp,
        kappa_form_bound: 2.0 * kappa_eff * delta_sum + disp,
        vacuous,
    })
}

/// Worst-case increment, scale and Lipschitz constant across per-point losses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSummary {
    /// `min_i inc_{g_i}(gamma - eta; D_eff)`.
    pub lower_increment: f64,
    /// `max_i g_i(D_eff)`.
    pub upper_scale: f64,
    /// `max_i L_i` on `[0, D_eff + Delta0]`.
    pub upper_lipschitz: f64,
    /// `upper_scale / lower_increment`.
    #[serde(with = "crate::real")]
    pub kappa_het: f64,
}

/// Certificate for an objective with one loss per point, using the lower
/// increment envelope and the upper scale and Lipschitz envelopes.
pub fn heterogeneous_bound(
    losses: &[LossSpec],
    inputs: &BoundInputs,
) -> Result<(Certificate, EnvelopeSummary)> {
    inputs.validate()?;
    let Some(first) = losses.first() else {
        return domain("heterogeneous bound needs at least one loss");
    };
    let margin = inputs.gamma - inputs.eta;
    let radius = inputs.d_eff;
    let lip_domain = inputs.lipschitz_domain();
    let m = margin.max(0.0);

    let mut lower_nom = f64::INFINITY;
    let mut lower_eff = f64::INFINITY;
    let mut upper_scale: f64 = 0.0;
    let mut upper_lip: f64 = 0.0;
    for g in losses {
        g.validate()?;
        lower_nom = lower_nom.min(if inputs.gamma > 0.0 {
            g.increment(inputs.gamma, radius)?
        } else {
            0.0
        });
        lower_eff = lower_eff.min(g.increment(m, radius)?);
        upper_scale = upper_scale.max(g.eval(inputs.d_eff)?);
        upper_lip = upper_lip.max(g.lipschitz_bound(lip_domain)?);
    }

    // A family w_i g of one base loss: the condition number is the weight
    // ratio times the base condition number.
    let same_family = losses.iter().all(|g| g.kind == first.kind);
    let (k_nom, k_eff) = if same_family {
        let w_max = losses.iter().map(|g| g.weight).fold(0.0, f64::max);
        let w_min = losses
            .iter()
            .map(|g| g.weight)
            .fold(f64::INFINITY, f64::min);
        let ratio = w_max / w_min;
        let (kn, _) = kappa_value(first, inputs.gamma, radius, inputs.d_eff)?;
        let (ke, _) = kappa_value(first, m, radius, inputs.d_eff)?;
        (ratio * kn, ratio * ke)
    } else {
        let div = |s: f64, inc: f64| if inc > 0.0 { s / inc } else { f64::INFINITY };
        (div(upper_scale, lower_nom), div(upper_scale, lower_eff))
    };
    let env = Envelope {
        kappa: ConditionNumber {
            value: k_nom,
            gamma_used: inputs.gamma,
            d_eff_used: inputs.d_eff,
            increment_used: lower_nom,
        },
        kappa_effective: k_eff,
        nominal_increment: lower_nom,
        effective_increment: lower_eff,
        l_g: upper_lip,
    };
    let summary = EnvelopeSummary {
        lower_increment: lower_eff,
        upper_scale,
        upper_lipschitz: upper_lip,
        kappa_het: if m > 0.0 { k_eff } else { f64::INFINITY },
    };
    Ok((assemble(inputs, env, margin, radius, None), summary))
}

/// One level of a hierarchical clustering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeLevel {
    #[serde(with = "crate::real")]
    pub kappa: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeBound {
    #[serde(with = "crate::real")]
    pub bound: f64,
    #[serde(with = "crate::real")]
    pub kappa_max: f64,
    /// Whether `gamma_l >= rho D_l` on every level; `None` without `rho` or
    /// level geometry.
    pub geometrically_consistent: Option<bool>,
}

/// `sum_l kappa_l delta_l`.
pub fn tree_bound(levels: &[TreeLevel], rho: Option<f64>) -> TreeBound {
    let bound = levels
        .iter()
        .map(|l| {
            if l.delta == 0.0 {
                0.0
            } else {
                l.kappa * l.delta
            }
        })
        .sum();
    let kappa_max = levels.iter().map(|l| l.kappa).fold(0.0, f64::max);
    let geometrically_consistent = rho.and_then(|rho| {
        levels
            .iter()
            .map(|l| Some(l.gamma? >= rho * l.d?))
            .collect::<Option<Vec<bool>>>()
            .map(|v| v.into_iter().all(|b| b))
    });
    TreeBound {
        bound,
        kappa_max,
        geometrically_consistent,
    }
}

/// Ingredients of the time-`t` tracking certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingInputs {
    pub gamma_t: f64,
    pub d_t: f64,
    /// Separation at time `t`, fixing the Lipschitz domain.
    pub delta0_t: f64,
    pub eta_alg: f64,
    pub eta_drift: f64,
    #[serde(with = "crate::real")]
    pub delta_t: f64,
    #[serde(with = "crate::real")]
    pub delta_approx_t: f64,
    pub opt_per_point: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingCertificate {
    pub eta_total: f64,
    #[serde(with = "crate::real")]
    pub kappa_t: f64,
    pub increment: f64,
    pub l_g: f64,
    /// `kappa_t (delta_t + delta_approx_t) + L_g eta_t / inc`.
    #[serde(with = "crate::real")]
    pub bound: f64,
    /// Same with `OPT_n / n` in place of `g(D_t)`.
    #[serde(with = "crate::real")]
    pub bound_exact_form: f64,
    pub vacuous: bool,
}

pub fn tracking_bound(loss: &LossSpec, t: &TrackingInputs) -> Result<TrackingCertificate> {
    for (name, v) in [
        ("D_t", t.d_t),
        ("Delta0_t", t.delta0_t),
        ("eta_alg", t.eta_alg),
        ("eta_drift", t.eta_drift),
        ("delta_t", t.delta_t),
        ("delta_approx_t", t.delta_approx_t),
        ("OPT/n", t.opt_per_point),
    ] {
        if !(v >= 0.0) {
            return domain(format!("{name} must be non-negative, got {v}"));
        }
    }
    let eta = t.eta_alg + t.eta_drift;
    let margin = t.gamma_t - eta;
    let (kappa_t, inc) = kappa_value(loss, margin.max(0.0), t.d_t, t.d_t)?;
    let l_g = loss.lipschitz_bound(t.d_t + t.delta0_t)?;
    let delta_sum = t.delta_t + t.delta_approx_t;
    let vacuous = !(eta < t.gamma_t) || !(inc > 0.0) || !delta_sum.is_finite();
    let (bound, exact) = if vacuous {
        (f64::INFINITY, f64::INFINITY)
    } else {
        let disp = l_g * eta / inc;
        (
            condition_number_bound(kappa_t, t.delta_t, t.delta_approx_t, disp),
            t.opt_per_point / inc * delta_sum + disp,
        )
    };
    Ok(TrackingCertificate {
        eta_total: eta,
        kappa_t: if vacuous { f64::INFINITY } else { kappa_t },
        increment: inc,
        l_g,
        bound,
        bound_exact_form: exact,
        vacuous,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs(
        opt_per_point: f64,
        n: usize,
        gamma: f64,
        d_eff: f64,
        eta: f64,
        delta: f64,
    ) -> BoundInputs {
        BoundInputs {
            opt_n: opt_per_point * n as f64,
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
    fn condition_number_examples() {
        assert_eq!(
            condition_number(&LossSpec::squared(), 1.0, 2.0)
                .unwrap()
                .value,
            4.0
        );
        assert_eq!(
            condition_number(&LossSpec::linear(), 1.0, 2.0)
                .unwrap()
                .value,
            2.0
        );
        let h = LossSpec::huber(2.0).unwrap();
        assert_eq!(condition_number(&h, 0.5, 1.0).unwrap().value, 4.0);
        assert_eq!(
            condition_number(&LossSpec::squared(), 0.0, 2.0)
                .unwrap()
                .value,
            f64::INFINITY
        );
        assert_eq!(
            condition_number(&LossSpec::squared(), -1.0, 2.0)
                .unwrap()
                .value,
            f64::INFINITY
        );
    }

    #[test]
    fn global_bound_examples() {
        let c = global_bound(&LossSpec::squared(), &inputs(1.0, 10, 2.0, 1.0, 0.0, 0.04)).unwrap();
        assert!((c.bound_total - 0.01).abs() < 1e-15);
        assert!(!c.vacuous);
        let v = global_bound(&LossSpec::squared(), &inputs(1.0, 10, 2.0, 1.0, 2.0, 0.04)).unwrap();
        assert!(v.vacuous && v.bound_total.is_infinite() && v.bound_reported == 1.0);
        let z = global_bound(&LossSpec::squared(), &inputs(1.0, 10, 2.0, 1.0, 0.0, 0.0)).unwrap();
        assert_eq!(z.bound_total, 0.0);
        let mut bad = inputs(1.0, 10, 2.0, 1.0, 0.0, 0.0);
        bad.delta = -0.1;
        assert!(global_bound(&LossSpec::squared(), &bad).is_err());
    }

    #[test]
    fn kappa_form_matches_exact_when_opt_is_the_scale() {
        // OPT/n = g(D_eff) = 1
        let c = global_bound(&LossSpec::squared(), &inputs(1.0, 8, 2.0, 1.0, 0.0, 0.04)).unwrap();
        assert_eq!(c.kappa_form_bound, c.bound_total);
        assert_eq!(condition_number_bound(4.0, 0.01, 0.0, 0.0), 0.04);
        assert_eq!(
            condition_number_bound(f64::INFINITY, 0.01, 0.0, 0.0),
            f64::INFINITY
        );
    }

    #[test]
    fn local_bound_examples() {
        let inp = inputs(0.5, 10, 1.0, 1.0, 0.0, 0.1);
        let g = global_bound(&LossSpec::squared(), &inp).unwrap();
        let l0 = local_core_bound(&LossSpec::squared(), &inp, 0.0).unwrap();
        assert_eq!(l0.bound_total, g.bound_total);
        let l = local_core_bound(&LossSpec::squared(), &inp, 0.5).unwrap();
        assert_eq!(l.effective_increment, 4.0);
        assert!(l.bound_total <= g.bound_total);
        assert!(local_core_bound(&LossSpec::squared(), &inp, 1.0).is_err());
        assert!(local_core_bound(&LossSpec::squared(), &inp, -0.1).is_err());
    }

    #[test]
    fn zero_error_flag() {
        // opt term = 0.5 / (10 * 4) * 0.064 = 0.0008 < 1/10
        let inp = inputs(0.5, 10, 1.0, 1.0, 0.0, 0.064);
        let l = local_core_bound(&LossSpec::squared(), &inp, 0.5).unwrap();
        assert_eq!(l.zero_error_certified, Some(true));
    }

    #[test]
    fn eta_kmeans_examples() {
        let e = eta_bound_kmeans(1.0, 0.5, 1.0, 0.02, 0.0).unwrap();
        assert!((e - 0.2).abs() < 1e-15);
        assert_eq!(eta_bound_kmeans(1.0, 0.5, 1.0, 0.0, 0.0).unwrap(), 0.0);
        assert!(eta_bound_kmeans(1.0, 0.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn tube_at_zero_displacement_doubles_the_optimization_term() {
        let t = TubeInputs {
            opt_n: 5.0,
            n: 10,
            gamma: 2.0,
            d_eff: 1.0,
            delta0: 4.0,
            delta_approx: 0.01,
            delta1: 0.03,
            delta2: 0.03,
            eta1: 0.0,
            eta2: 0.0,
        };
        let tube = hamming_tube_bound(&LossSpec::squared(), &t).unwrap();
        let single = global_bound(
            &LossSpec::squared(),
            &BoundInputs {
                opt_n: 5.0,
                n: 10,
                gamma: 2.0,
                d_eff: 1.0,
                delta0: 4.0,
                eta: 0.0,
                delta: 0.03,
                delta_approx: 0.01,
            },
        )
        .unwrap();
        assert_eq!(tube.bound, 2.0 * single.bound_optimization_term);
        let mut far = t.clone();
        far.eta2 = 2.5;
        assert!(
            hamming_tube_bound(&LossSpec::squared(), &far)
                .unwrap()
                .vacuous
        );
    }

    #[test]
    fn heterogeneous_reduces_to_global() {
        let inp = BoundInputs {
            opt_n: 3.0,
            n: 6,
            gamma: 1.5,
            d_eff: 0.7,
            delta0: 2.9,
            eta: 0.3,
            delta: 0.05,
            delta_approx: 0.02,
        };
        for loss in [
            LossSpec::squared(),
            LossSpec::linear(),
            LossSpec::huber(0.4).unwrap(),
        ] {
            let g = global_bound(&loss, &inp).unwrap();
            let (h, _) = heterogeneous_bound(&vec![loss.clone(); 6], &inp).unwrap();
            assert_eq!(g, h);
        }
    }

    #[test]
    fn weighted_squared_inherits_weight_ratio() {
        let inp = inputs(1.0, 4, 1.0, 2.0, 0.0, 0.0);
        let losses: Vec<LossSpec> = [1.0, 2.0, 1.5, 2.0]
            .iter()
            .map(|&w| LossSpec::squared().with_weight(w).unwrap())
            .collect();
        let (c, env) = heterogeneous_bound(&losses, &inp).unwrap();
        assert_eq!(env.kappa_het, 2.0 * 4.0);
        assert_eq!(c.kappa.value, 8.0);
        assert_eq!(env.lower_increment, 1.0);
        assert_eq!(env.upper_scale, 8.0);
    }

    #[test]
    fn mixed_huber_lower_envelope() {
        let inp = inputs(1.0, 2, 3.0, 1.0, 0.0, 0.0);
        let h1 = LossSpec::huber(1.0).unwrap();
        let h2 = LossSpec::huber(2.0).unwrap();
        let (_, env) = heterogeneous_bound(&[h1.clone(), h2.clone()], &inp).unwrap();
        let expect = h1
            .increment(3.0, 1.0)
            .unwrap()
            .min(h2.increment(3.0, 1.0).unwrap());
        assert_eq!(env.lower_increment, expect);
    }

    #[test]
    fn tree_examples() {
        let lvl = |kappa, delta| TreeLevel {
            kappa,
            delta,
            gamma: None,
            d: None,
        };
        assert_eq!(tree_bound(&[lvl(4.0, 0.01)], None).bound, 0.04);
        let t = tree_bound(&[lvl(4.0, 0.01), lvl(2.0, 0.005)], None);
        assert!((t.bound - 0.05).abs() < 1e-15);
        assert_eq!(t.kappa_max, 4.0);
        assert_eq!(
            tree_bound(&[lvl(4.0, 0.0), lvl(f64::INFINITY, 0.0)], None).bound,
            0.0
        );
        let geo = TreeLevel {
            kappa: 1.0,
            delta: 0.0,
            gamma: Some(2.0),
            d: Some(1.0),
        };
        assert_eq!(
            tree_bound(std::slice::from_ref(&geo), Some(2.0)).geometrically_consistent,
            Some(true)
        );
        assert_eq!(
            tree_bound(&[geo], Some(3.0)).geometrically_consistent,
            Some(false)
        );
    }

    #[test]
    fn tracking_examples() {
        let t = TrackingInputs {
            gamma_t: 2.0,
            d_t: 1.0,
            delta0_t: 4.0,
            eta_alg: 0.5,
            eta_drift: 0.5,
            delta_t: 0.0,
            delta_approx_t: 0.0,
            opt_per_point: 0.5,
        };
        let c = tracking_bound(&LossSpec::squared(), &t).unwrap();
        assert_eq!(c.increment, 1.0);
        assert_eq!(c.kappa_t, 1.0);
        let still = TrackingInputs {
            eta_alg: 0.0,
            eta_drift: 0.0,
            delta_t: 0.01,
            ..t.clone()
        };
        let c = tracking_bound(&LossSpec::squared(), &still).unwrap();
        let kappa = condition_number(&LossSpec::squared(), 2.0, 1.0)
            .unwrap()
            .value;
        assert_eq!(c.bound, condition_number_bound(kappa, 0.01, 0.0, 0.0));
        let spike = TrackingInputs {
            eta_drift: 1.6,
            ..t
        };
        assert!(
            tracking_bound(&LossSpec::squared(), &spike)
                .unwrap()
                .vacuous
        );
    }
}
