//! Point sets, instances with a benchmark pair, and the benchmark geometry:
//! effective radius, anchor separation, margin, balance and the core/belt
//! split.

use crate::error::{domain, precondition, Error, Result};
use crate::partition::Partition;
use serde::{Deserialize, Serialize};

/// `n` points in `d` dimensions, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Points {
    d: usize,
    data: Vec<f64>,
}

impl Points {
    pub fn new(d: usize, data: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return domain("points need dimension d >= 1");
        }
        if !data.len().is_multiple_of(d) {
            return domain(format!(
                "coordinate buffer of length {} is not a multiple of d = {d}",
                data.len()
            ));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return domain(format!(
                "non-finite coordinate in row {} column {}",
                pos / d,
                pos % d
            ));
        }
        Ok(Self { d, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map(Vec::len).unwrap_or(0);
        if let Some(i) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: rows[i].len(),
            });
        }
        Self::new(d, rows.concat())
    }

    pub fn from_1d(xs: &[f64]) -> Result<Self> {
        Self::new(1, xs.to_vec())
    }

    pub fn n(&self) -> usize {
        self.data.len() / self.d
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.d);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self { d: self.d, data }
    }

    pub fn map_coords(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            d: self.d,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Euclidean distance; the absolute difference in one dimension.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() == 1 {
        return (a[0] - b[0]).abs();
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Prototype locations. Data-restricted prototypes also remember which data
/// points they are.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prototypes {
    pub points: Points,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub medoid_indices: Option<Vec<usize>>,
}

/// Where prototypes may live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Feasibility {
    Free,
    DataRestricted,
}

impl Prototypes {
    pub fn free(points: Points) -> Self {
        Self {
            points,
            medoid_indices: None,
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Points::from_rows(rows).map(Self::free)
    }

    pub fn from_1d(xs: &[f64]) -> Result<Self> {
        Points::from_1d(xs).map(Self::free)
    }

    pub fn medoids(data: &Points, idx: &[usize]) -> Self {
        Self {
            points: data.select(idx),
            medoid_indices: Some(idx.to_vec()),
        }
    }

    pub fn k(&self) -> usize {
        self.points.n()
    }

    pub fn d(&self) -> usize {
        self.points.d()
    }

    pub fn get(&self, j: usize) -> &[f64] {
        self.points.row(j)
    }

    pub fn feasibility(&self) -> Feasibility {
        if self.medoid_indices.is_some() {
            Feasibility::DataRestricted
        } else {
            Feasibility::Free
        }
    }

    /// Prototypes reordered so that new slot `perm[j]` holds old prototype `j`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let k = self.k();
        let mut order = vec![0usize; k];
        for (j, &target) in perm.iter().enumerate() {
            order[target] = j;
        }
        Self {
            points: self.points.select(&order),
            medoid_indices: self
                .medoid_indices
                .as_ref()
                .map(|m| order.iter().map(|&j| m[j]).collect()),
        }
    }
}

/// A benchmark partition with its anchors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Benchmark {
    pub partition: Partition,
    pub prototypes: Prototypes,
}

/// A dataset with an optional benchmark pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub points: Points,
    pub benchmark: Option<Benchmark>,
}

impl Instance {
    pub fn new(points: Points) -> Result<Self> {
        if points.n() == 0 {
            return domain("an instance needs at least one point");
        }
        Ok(Self {
            points,
            benchmark: None,
        })
    }

    pub fn with_benchmark(
        points: Points,
        partition: Partition,
        prototypes: Prototypes,
    ) -> Result<Self> {
        let mut inst = Self::new(points)?;
        inst.set_benchmark(partition, prototypes)?;
        Ok(inst)
    }

    pub fn set_benchmark(&mut self, partition: Partition, prototypes: Prototypes) -> Result<()> {
        if partition.n() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: partition.n(),
            });
        }
        if prototypes.k() != partition.k() {
            return domain(format!(
                "benchmark has {} prototypes for {} clusters",
                prototypes.k(),
                partition.k()
            ));
        }
        if prototypes.d() != self.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                got: prototypes.d(),
            });
        }
        partition.require_nonempty()?;
        self.benchmark = Some(Benchmark {
            partition,
            prototypes,
        });
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.points.n()
    }

    pub fn d(&self) -> usize {
        self.points.d()
    }

    pub fn benchmark(&self) -> Result<&Benchmark> {
        self.benchmark
            .as_ref()
            .ok_or_else(|| Error::Precondition("instance has no benchmark".into()))
    }

    /// Distance from every point to its own benchmark anchor.
    pub fn anchor_distances(&self) -> Result<Vec<f64>> {
        let b = self.benchmark()?;
        Ok(self
            .points
            .rows()
            .zip(b.partition.labels())
            .map(|(x, &j)| distance(x, b.prototypes.get(j)))
            .collect())
    }
}

/// Benchmark geometry `(D_eff, Delta0, gamma, c_b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometrySummary {
    pub d_eff: f64,
    pub delta0: f64,
    pub gamma: f64,
    pub balance: f64,
    pub n: usize,
    pub k: usize,
}

impl GeometrySummary {
    pub fn separable(&self) -> bool {
        self.gamma > 0.0
    }
}

/// Minimum pairwise distance between prototypes (first pair on ties).
pub fn min_separation(protos: &Prototypes) -> Result<f64> {
    let k = protos.k();
    if k < 2 {
        return precondition("prototype separation is undefined for k = 1");
    }
    let mut best = f64::INFINITY;
    for j in 0..k {
        for l in j + 1..k {
            best = best.min(distance(protos.get(j), protos.get(l)));
        }
    }
    Ok(best)
}

pub fn summarize_geometry(inst: &Instance) -> Result<GeometrySummary> {
    let b = inst.benchmark()?;
    let delta0 = min_separation(&b.prototypes)?;
    let d_eff = inst.anchor_distances()?.into_iter().fold(0.0, f64::max);
    let n = inst.n();
    let smallest = b.partition.sizes().into_iter().min().unwrap_or(0);
    Ok(GeometrySummary {
        d_eff,
        delta0,
        gamma: delta0 - 2.0 * d_eff,
        balance: smallest as f64 / n as f64,
        n,
        k: b.partition.k(),
    })
}

/// Outcome of a margin inequality check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginCheck {
    /// `false` when `gamma <= 0`; the margin is then not meaningful.
    pub separable: bool,
    pub holds: bool,
    /// Minimum of `d(x_i, theta_l) - d(x_i, theta_j) - required_gap` over the
    /// checked points; `+inf` when no point was checked.
    #[serde(with = "crate::real")]
    pub worst_slack: f64,
    /// `(point, competing cluster)` attaining the worst slack.
    pub worst_at: Option<(usize, usize)>,
    pub required_gap: f64,
    pub checked_points: usize,
}

/// Relative tolerance for floating-point slack in margin checks.
pub const MARGIN_TOLERANCE: f64 = 1e-12;

fn margin_check(inst: &Instance, s: f64) -> Result<MarginCheck> {
    let geo = summarize_geometry(inst)?;
    let b = inst.benchmark()?;
    let required_gap = geo.gamma + 2.0 * s;
    if !geo.separable() {
        return Ok(MarginCheck {
            separable: false,
            holds: false,
            worst_slack: f64::NAN,
            worst_at: None,
            required_gap,
            checked_points: 0,
        });
    }
    let anchor = inst.anchor_distances()?;
    let limit = geo.d_eff - s;
    let mut worst = f64::INFINITY;
    let mut worst_at = None;
    let mut checked = 0;
    for (i, x) in inst.points.rows().enumerate() {
        if anchor[i] > limit {
            continue;
        }
        checked += 1;
        let own = b.partition.labels()[i];
        for l in (0..geo.k).filter(|&l| l != own) {
            let slack = distance(x, b.prototypes.get(l)) - anchor[i] - required_gap;
            if slack < worst {
                worst = slack;
                worst_at = Some((i, l));
            }
        }
    }
    let tol = MARGIN_TOLERANCE * geo.delta0.max(1.0);
    Ok(MarginCheck {
        separable: true,
        holds: worst >= -tol,
        worst_slack: worst,
        worst_at,
        required_gap,
        checked_points: checked,
    })
}

/// Checks `d(x_i, theta_l) >= d(x_i, theta_j) + gamma` for every point and
/// every competing anchor.
pub fn benchmark_margin_check(inst: &Instance) -> Result<MarginCheck> {
    margin_check(inst, 0.0)
}

/// Checks the deepened margin `gamma + 2s` on the depth-`s` core.
pub fn enhanced_margin_check(inst: &Instance, s: f64) -> Result<MarginCheck> {
    if !(s >= 0.0) {
        return domain(format!("core depth must be non-negative, got {s}"));
    }
    margin_check(inst, s)
}

/// Core and belt index sets at depth `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreBelt {
    pub depth_s: f64,
    pub core_indices: Vec<usize>,
    pub belt_indices: Vec<usize>,
}

pub fn core_belt(inst: &Instance, s: f64) -> Result<CoreBelt> {
    if !(s >= 0.0) {
        return domain(format!("core depth must be non-negative, got {s}"));
    }
    let anchor = inst.anchor_distances()?;
    let d_eff = anchor.iter().copied().fold(0.0, f64::max);
    if s > d_eff {
        return domain(format!("core depth {s} exceeds D_eff = {d_eff}"));
    }
    let limit = d_eff - s;
    let (core, belt): (Vec<usize>, Vec<usize>) = (0..inst.n()).partition(|&i| anchor[i] <= limit);
    Ok(CoreBelt {
        depth_s: s,
        core_indices: core,
        belt_indices: belt,
    })
}
