//! Admissible loss generators `g`, their uniform increments and Lipschitz
//! envelopes.
//!
//! A loss maps a distance `r >= 0` to a cost with `g(0) = 0` and `g`
//! non-decreasing. The uniform increment
//!
//! ```text
//! inc_g(gamma; D) = inf_{0 <= r <= D} g(r + gamma) - g(r)
//! ```
//!
//! is the least cost of pushing a point at distance at most `D` from its anchor
//! a further `gamma` away. Squared, linear and Huber losses are convex, so the
//! infimum sits at `r = 0` and has a closed form. Tabulated losses may be
//! non-convex and use a grid infimum.

use crate::error::{domain, Error, Result};
use serde::{Deserialize, Serialize};

/// Default number of grid cells for numeric increments of tabulated losses.
pub const DEFAULT_INCREMENT_RESOLUTION: usize = 4096;

/// A piecewise-linear loss given by `(r, g(r))` knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub r: Vec<f64>,
    pub g: Vec<f64>,
    /// Grid resolution used for the numeric increment.
    pub resolution: usize,
}

impl Table {
    pub fn new(r: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        if r.len() != g.len() || r.len() < 2 {
            return domain("tabulated loss needs at least two (r, g) knots of equal length");
        }
        if r[0] != 0.0 || g[0] != 0.0 {
            return domain("tabulated loss must start at (0, 0)");
        }
        if r.iter().chain(g.iter()).any(|v| !v.is_finite()) {
            return domain("tabulated loss knots must be finite");
        }
        if r.windows(2).any(|w| w[1] <= w[0]) {
            return domain("tabulated r-grid must be strictly increasing");
        }
        if g.windows(2).any(|w| w[1] < w[0]) {
            return domain("tabulated loss values must be non-decreasing");
        }
        Ok(Self {
            r,
            g,
            resolution: DEFAULT_INCREMENT_RESOLUTION,
        })
    }

    pub fn with_resolution(mut self, resolution: usize) -> Result<Self> {
        if resolution == 0 {
            return domain("increment resolution must be positive");
        }
        self.resolution = resolution;
        Ok(self)
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().unwrap()
    }

    fn eval(&self, r: f64) -> Result<f64> {
        let r_max = self.r_max();
        if r > r_max {
            return Err(Error::Range(format!(
                "r = {r} exceeds the tabulated grid maximum {r_max}"
            )));
        }
        // first knot with r_k >= r
        let idx = self.r.partition_point(|&k| k < r);
        if idx == 0 {
            return Ok(self.g[0]);
        }
        let (r0, r1) = (self.r[idx - 1], self.r[idx]);
        let (g0, g1) = (self.g[idx - 1], self.g[idx]);
        let t = (r - r0) / (r1 - r0);
        Ok(g0 + t * (g1 - g0))
    }

    fn max_slope(&self, domain_max: f64) -> f64 {
        self.r
            .windows(2)
            .zip(self.g.windows(2))
            .filter(|(rw, _)| rw[0] < domain_max || rw[0] == 0.0)
            .map(|(rw, gw)| (gw[1] - gw[0]) / (rw[1] - rw[0]))
            .fold(0.0, f64::max)
    }
}

/// The generator family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LossKind {
    Squared,
    Linear,
    Huber { tau: f64 },
    Tabulated(Table),
}

/// A loss generator with a positive multiplicative weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    #[serde(flatten)]
    pub kind: LossKind,
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

fn huber(tau: f64, r: f64) -> f64 {
    if r <= tau {
        0.5 * r * r
    } else {
        tau * r - 0.5 * tau * tau
    }
}

impl LossSpec {
    pub fn squared() -> Self {
        Self {
            kind: LossKind::Squared,
            weight: 1.0,
        }
    }

    pub fn linear() -> Self {
        Self {
            kind: LossKind::Linear,
            weight: 1.0,
        }
    }

    pub fn huber(tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return domain(format!("huber requires a finite tau > 0, got {tau}"));
        }
        Ok(Self {
            kind: LossKind::Huber { tau },
            weight: 1.0,
        })
    }

    pub fn tabulated(table: Table) -> Self {
        Self {
            kind: LossKind::Tabulated(table),
            weight: 1.0,
        }
    }

    pub fn with_weight(mut self, weight: f64) -> Result<Self> {
        if !(weight > 0.0 && weight.is_finite()) {
            return domain(format!(
                "loss weight must be finite and positive, got {weight}"
            ));
        }
        self.weight = weight;
        Ok(self)
    }

    /// Short name used in reports and CSV output.
    pub fn name(&self) -> &'static str {
        match self.kind {
            LossKind::Squared => "squared",
            LossKind::Linear => "linear",
            LossKind::Huber { .. } => "huber",
            LossKind::Tabulated(_) => "tabulated",
        }
    }

    /// Re-checks the structural invariants (useful after deserialization).
    pub fn validate(&self) -> Result<()> {
        if !(self.weight > 0.0 && self.weight.is_finite()) {
            return domain("loss weight must be finite and positive");
        }
        match &self.kind {
            LossKind::Huber { tau } if !(*tau > 0.0 && tau.is_finite()) => {
                domain("huber requires a finite tau > 0")
            }
            LossKind::Tabulated(t) => Table::new(t.r.clone(), t.g.clone())
                .and_then(|fresh| fresh.with_resolution(t.resolution))
                .map(|_| ()),
            _ => Ok(()),
        }
    }

    /// `g(r)`. Panics never; negative or non-finite `r` is a domain error.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return domain(format!("loss evaluated at negative or NaN distance {r}"));
        }
        let base = match &self.kind {
            LossKind::Squared => r * r,
            LossKind::Linear => r,
            LossKind::Huber { tau } => huber(*tau, r),
            LossKind::Tabulated(t) => t.eval(r)?,
        };
        Ok(self.weight * base)
    }

    /// Uniform increment `inc_g(gamma; D)`.
    pub fn increment(&self, gamma: f64, d: f64) -> Result<f64> {
        if !(gamma >= 0.0) || !(d >= 0.0) {
            return domain(format!(
                "increment query needs gamma >= 0 and D >= 0, got gamma = {gamma}, D = {d}"
            ));
        }
        if gamma == 0.0 {
            return Ok(0.0);
        }
        let base = match &self.kind {
            LossKind::Squared => gamma * gamma,
            LossKind::Linear => gamma,
            // convex: r -> g(r + gamma) - g(r) is non-decreasing, infimum at r = 0
            LossKind::Huber { tau } => huber(*tau, gamma),
            LossKind::Tabulated(t) => {
                if d + gamma > t.r_max() {
                    return Err(Error::Range(format!(
                        "increment query D + gamma = {} exceeds the tabulated grid maximum {}",
                        d + gamma,
                        t.r_max()
                    )));
                }
                let cells = t.resolution;
                let mut best = f64::INFINITY;
                for i in 0..=cells {
                    let r = if i == cells {
                        d
                    } else {
                        d * (i as f64) / (cells as f64)
                    };
                    let inc = t.eval(r + gamma)? - t.eval(r)?;
                    best = best.min(inc);
                }
                best.max(0.0)
            }
        };
        Ok(self.weight * base)
    }

    /// A Lipschitz constant of `g` on `[0, domain_max]`.
    pub fn lipschitz_bound(&self, domain_max: f64) -> Result<f64> {
        if !(domain_max >= 0.0) {
            return domain(format!(
                "Lipschitz domain must be non-negative, got {domain_max}"
            ));
        }
        let base = match &self.kind {
            LossKind::Squared => 2.0 * domain_max,
            LossKind::Linear => 1.0,
            LossKind::Huber { tau } => tau.min(domain_max),
            LossKind::Tabulated(t) => t.max_slope(domain_max),
        };
        Ok(self.weight * base)
    }
}

impl Default for LossSpec {
    fn default() -> Self {
        Self::squared()
    }
}
