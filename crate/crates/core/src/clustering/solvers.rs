//! Heuristic solvers: multi-start Lloyd alternation and PAM k-medoids.

use super::{
    best_response_partition, cluster_cost, free_center, objective, Exactness, RestartRun,
    SolveResult,
};
use crate::error::{precondition, Result};
use crate::geometry::{distance, Feasibility, Points, Prototypes};
use crate::loss::LossSpec;
use crate::partition::Partition;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LloydConfig {
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
    /// Stop when the relative objective improvement of an iteration is at
    /// most this value.
    pub tol: f64,
    pub feasibility: Feasibility,
}

impl Default for LloydConfig {
    fn default() -> Self {
        Self {
            restarts: 10,
            seed: 0,
            max_iters: 300,
            tol: 1e-12,
            feasibility: Feasibility::Free,
        }
    }
}

fn check_k(points: &Points, k: usize) -> Result<()> {
    if k == 0 {
        return precondition("k must be at least 1");
    }
    if k > points.n() {
        return precondition(format!(
            "k = {k} exceeds the number of points n = {}",
            points.n()
        ));
    }
    Ok(())
}

/// Seeding proportional to `g(distance to the nearest chosen seed)`.
fn seed_indices(
    points: &Points,
    k: usize,
    loss: &LossSpec,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    let n = points.n();
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut weight: Vec<f64> = (0..n)
        .map(|i| loss.eval(distance(points.row(i), points.row(chosen[0]))))
        .collect::<Result<_>>()?;
    while chosen.len() < k {
        let total: f64 = weight.iter().sum();
        let next = if total > 0.0 && total.is_finite() {
            let mut u = rng.gen::<f64>() * total;
            let mut pick = None;
            for (i, &w) in weight.iter().enumerate() {
                if w > 0.0 {
                    pick = Some(i);
                    if u < w {
                        break;
                    }
                    u -= w;
                }
            }
            pick.expect("positive total weight has a positive entry")
        } else {
            // every point coincides with a seed; pick any unused index
            let unused: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            unused[rng.gen_range(0..unused.len())]
        };
        chosen.push(next);
        for (i, w) in weight.iter_mut().enumerate() {
            *w = w.min(loss.eval(distance(points.row(i), points.row(next)))?);
        }
    }
    Ok(chosen)
}

fn initial_prototypes(points: &Points, idx: &[usize], feasibility: Feasibility) -> Prototypes {
    match feasibility {
        Feasibility::Free => Prototypes::free(points.select(idx)),
        Feasibility::DataRestricted => Prototypes::medoids(points, idx),
    }
}

fn set_prototype(
    protos: &mut Prototypes,
    j: usize,
    points: &Points,
    source: Option<usize>,
    loc: &[f64],
) {
    let mut rows = protos.points.to_rows();
    rows[j] = loc.to_vec();
    protos.points = Points::from_rows(&rows).expect("prototype rows share one dimension");
    if let (Some(m), Some(i)) = (protos.medoid_indices.as_mut(), source) {
        m[j] = i;
    }
    debug_assert!(source.is_none_or(|i| points.row(i) == loc));
}

/// Moves the highest-loss point of a multi-point cluster into each empty
/// cluster and places that cluster's prototype on it.
fn repair_empty(
    points: &Points,
    partition: &mut Partition,
    protos: &mut Prototypes,
    loss: &LossSpec,
) -> Result<()> {
    loop {
        let sizes = partition.sizes();
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return Ok(());
        };
        let mut best: Option<(usize, f64)> = None;
        for (i, &j) in partition.labels().iter().enumerate() {
            if sizes[j] < 2 {
                continue;
            }
            let l = loss.eval(distance(points.row(i), protos.get(j)))?;
            if best.is_none_or(|(_, b)| l > b) {
                best = Some((i, l));
            }
        }
        let (i, _) = best.expect("k <= n guarantees a cluster with two or more points");
        let mut labels = partition.labels().to_vec();
        labels[i] = empty;
        *partition = Partition::new(labels, partition.k())?;
        set_prototype(protos, empty, points, Some(i), points.row(i));
    }
}

fn best_location(
    points: &Points,
    members: &[usize],
    loss: &LossSpec,
    feasibility: Feasibility,
) -> Result<(Vec<f64>, Option<usize>)> {
    match feasibility {
        Feasibility::Free => Ok((free_center(points, members, loss)?, None)),
        Feasibility::DataRestricted => {
            let mut best = (0, f64::INFINITY);
            for c in 0..points.n() {
                let cost = cluster_cost(points, members, points.row(c), loss)?;
                if cost < best.1 {
                    best = (c, cost);
                }
            }
            Ok((points.row(best.0).to_vec(), Some(best.0)))
        }
    }
}

fn run_from(
    points: &Points,
    mut protos: Prototypes,
    loss: &LossSpec,
    cfg: &LloydConfig,
) -> Result<RestartRun> {
    let k = protos.k();
    let mut partition = best_response_partition(points, &protos)?;
    repair_empty(points, &mut partition, &mut protos, loss)?;
    let mut obj = objective(points, &partition, &protos, loss)?;
    let mut trace = vec![obj];
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        iterations += 1;
        let clusters = partition.clusters();
        for j in 0..k {
            let members = &clusters[j];
            let (loc, source) = best_location(points, members, loss, cfg.feasibility)?;
            let old = cluster_cost(points, members, protos.get(j), loss)?;
            let new = cluster_cost(points, members, &loc, loss)?;
            // only strict improvements, so the objective never increases
            if new < old {
                set_prototype(&mut protos, j, points, source, &loc);
            }
        }
        let mut next = best_response_partition(points, &protos)?;
        repair_empty(points, &mut next, &mut protos, loss)?;
        let new_obj = objective(points, &next, &protos, loss)?;
        trace.push(new_obj);
        let improvement = obj - new_obj;
        partition = next;
        obj = new_obj;
        if improvement <= cfg.tol * obj.abs().max(1.0) {
            break;
        }
    }
    Ok(RestartRun {
        partition,
        prototypes: protos,
        objective: obj,
        iterations,
        trace,
    })
}

fn collect(runs: Vec<RestartRun>, seed: u64, method: &str) -> SolveResult {
    let mut best = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.objective < runs[best].objective {
            best = r;
        }
    }
    SolveResult {
        partition: runs[best].partition.clone(),
        prototypes: runs[best].prototypes.clone(),
        objective: runs[best].objective,
        restarts_used: runs.len(),
        per_restart_objectives: runs.iter().map(|r| r.objective).collect(),
        best_restart: best,
        seed,
        method: method.into(),
        exactness: Exactness::Heuristic,
        runs,
    }
}

/// Multi-start Lloyd alternation. Restart `r` is seeded from `seed + r`, so
/// results do not depend on thread scheduling; the best restart wins with
/// ties going to the lowest restart index.
pub fn lloyd(points: &Points, k: usize, loss: &LossSpec, cfg: &LloydConfig) -> Result<SolveResult> {
    check_k(points, k)?;
    if cfg.restarts == 0 {
        return precondition("lloyd needs at least one restart");
    }
    let runs = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(r as u64));
            let idx = seed_indices(points, k, loss, &mut rng)?;
            run_from(
                points,
                initial_prototypes(points, &idx, cfg.feasibility),
                loss,
                cfg,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(collect(runs, cfg.seed, "lloyd"))
}

/// A single Lloyd run started from the given prototypes.
pub fn lloyd_warm_start(
    points: &Points,
    init: &Prototypes,
    loss: &LossSpec,
    cfg: &LloydConfig,
) -> Result<SolveResult> {
    check_k(points, init.k())?;
    if init.d() != points.d() {
        return Err(crate::Error::DimensionMismatch {
            expected: points.d(),
            got: init.d(),
        });
    }
    let run = run_from(points, init.clone(), loss, cfg)?;
    Ok(collect(vec![run], cfg.seed, "lloyd-warm-start"))
}

/// PAM: greedy build followed by best single swaps until no swap improves.
pub fn kmedoids_swap(
    points: &Points,
    k: usize,
    loss: &LossSpec,
    cfg: &LloydConfig,
) -> Result<SolveResult> {
    check_k(points, k)?;
    let n = points.n();
    let g: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|c| loss.eval(distance(points.row(i), points.row(c))))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    // build
    let mut medoids: Vec<usize> = Vec::with_capacity(k);
    let mut served = vec![f64::INFINITY; n];
    for _ in 0..k {
        let mut best = (usize::MAX, f64::INFINITY);
        for c in (0..n).filter(|c| !medoids.contains(c)) {
            let total: f64 = (0..n).map(|i| served[i].min(g[i][c])).sum();
            if total < best.1 {
                best = (c, total);
            }
        }
        medoids.push(best.0);
        for i in 0..n {
            served[i] = served[i].min(g[i][best.0]);
        }
    }

    let cost_of = |m: &[usize]| -> f64 {
        (0..n)
            .map(|i| m.iter().map(|&c| g[i][c]).fold(f64::INFINITY, f64::min))
            .sum()
    };
    let mut current = cost_of(&medoids);
    let mut trace = vec![current];
    let mut iterations = 0;
    loop {
        // nearest and second-nearest served cost per point
        let mut first = vec![(usize::MAX, f64::INFINITY); n];
        let mut second = vec![f64::INFINITY; n];
        for i in 0..n {
            for (s, &c) in medoids.iter().enumerate() {
                let v = g[i][c];
                if v < first[i].1 {
                    second[i] = first[i].1;
                    first[i] = (s, v);
                } else if v < second[i] {
                    second[i] = v;
                }
            }
        }
        let mut best: Option<(usize, usize, f64)> = None;
        for s in 0..k {
            for h in (0..n).filter(|h| !medoids.contains(h)) {
                let total: f64 = (0..n)
                    .map(|i| {
                        let keep = if first[i].0 == s {
                            second[i]
                        } else {
                            first[i].1
                        };
                        keep.min(g[i][h])
                    })
                    .sum();
                if best.is_none_or(|(_, _, b)| total < b) {
                    best = Some((s, h, total));
                }
            }
        }
        match best {
            Some((s, h, total)) if total < current - 1e-12 * current.abs().max(1.0) => {
                medoids[s] = h;
                current = cost_of(&medoids);
                trace.push(current);
                iterations += 1;
            }
            _ => break,
        }
    }
    let prototypes = Prototypes::medoids(points, &medoids);
    let partition = best_response_partition(points, &prototypes)?;
    let objective = objective(points, &partition, &prototypes, loss)?;
    let run = RestartRun {
        partition,
        prototypes,
        objective,
        iterations,
        trace,
    };
    Ok(collect(vec![run], cfg.seed, "kmedoids-pam"))
}
