//! The five commands. Each returns a report; assertion outcomes are recorded
//! in the report and turned into an exit code by the caller.

use crate::config::{Command, RunConfig};
use crate::error::{CliError, Result};
use crate::ingest::{attach_prototypes, ingest_csv, read_weights};
use crate::report::{
    AssertionOutcome, BenchmarkComparison, CellRef, CertifySection, CoreEntry, DiagnoseSection,
    HeterogeneousEntry, OptReference, OracleSection, PhaseSection, Report, SolveSummary,
    TrackingSection, TubeEntry,
};
use clustercert::certify::{
    diagnose, global_bound, hamming_tube_bound, heterogeneous_bound, local_core_bound, BoundInputs,
    TubeInputs,
};
use clustercert::clustering::{
    brute_force_opt, displacement, enumerate_profiled, exact_1d_dp, lloyd, objective,
    objective_per_point, GapReport, LloydConfig, OptKind, SolveResult, ENUMERATION_LIMIT,
};
use clustercert::geometry::{core_belt, summarize_geometry};
use clustercert::oracle::{run_default_suite, Tally, BOUND_TOLERANCE};
use clustercert::partition::{hamming_distance, misclassification_rate};
use clustercert::phase::{
    cell_sizes, failure_ratio, phase_sweep, threshold_kmeans, threshold_kmedian_1d, Layout,
    PhaseGrid,
};
use clustercert::tracking::{run_tracking, DriftScenario};
use clustercert::{Instance, LossKind, LossSpec};
use serde::Serialize;
use std::path::Path;
use std::time::Instant;

/// Points on the core depth grid `s = i/10 * D_eff`.
pub const CORE_GRID: usize = 10;

fn within(measured: f64, bound: f64) -> bool {
    measured <= bound + BOUND_TOLERANCE * bound.abs().max(1.0)
}

/// Validates the configuration, runs the command and records the wall time.
pub fn run(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let start = Instant::now();
    let mut report = match cfg.command {
        Command::Certify => cmd_certify(cfg),
        Command::Diagnose => cmd_diagnose(cfg),
        Command::Phase => cmd_phase(cfg),
        Command::Track => cmd_track(cfg),
        Command::Oracle => cmd_oracle(cfg),
    }?;
    report.timing.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

fn load_instance(cfg: &RunConfig, loss: &LossSpec) -> Result<Instance> {
    let path = cfg
        .input
        .as_deref()
        .ok_or_else(|| CliError::Config(format!("{} needs --input", cfg.command.name())))?;
    let mut inst = ingest_csv(path, loss)?;
    if let Some(p) = &cfg.prototypes {
        attach_prototypes(&mut inst, p)?;
    }
    Ok(inst)
}

fn require_benchmark(inst: &Instance, cfg: &RunConfig) -> Result<()> {
    if inst.benchmark.is_none() {
        return Err(CliError::Config(format!(
            "{} needs benchmark labels: add a \"label\" column to the input",
            cfg.command.name()
        )));
    }
    Ok(())
}

fn cluster_count(inst: &Instance, cfg: &RunConfig) -> Result<usize> {
    match (cfg.k, inst.benchmark.as_ref().map(|b| b.partition.k())) {
        (Some(k), Some(kb)) if k != kb => Err(CliError::Config(format!(
            "--k {k} disagrees with the {kb} benchmark clusters"
        ))),
        (Some(k), _) | (None, Some(k)) => Ok(k),
        (None, None) => Err(CliError::Config(
            "--k is required without a label column".into(),
        )),
    }
}

fn lloyd_config(cfg: &RunConfig) -> LloydConfig {
    LloydConfig {
        restarts: cfg.restarts,
        seed: cfg.seed,
        ..Default::default()
    }
}

/// Exact optimum when enumeration or the 1D program applies, else the best
/// objective seen.
fn reference_opt(inst: &Instance, k: usize, loss: &LossSpec, seen: &[f64]) -> Result<OptReference> {
    let best_seen = seen.iter().copied().fold(f64::INFINITY, f64::min);
    let exact = if inst.n() <= ENUMERATION_LIMIT {
        Some(brute_force_opt(
            &inst.points,
            k,
            loss,
            clustercert::Feasibility::Free,
        )?)
    } else if inst.d() == 1 && matches!(loss.kind, LossKind::Squared | LossKind::Linear) {
        Some(exact_1d_dp(&inst.points, k, loss)?)
    } else {
        None
    };
    Ok(match exact {
        Some(r) => OptReference {
            // Iterative prototypes may land a hair above a heuristic's value.
            value: r.objective.min(best_seen),
            kind: OptKind::ExactOracle,
            method: r.method,
        },
        None => OptReference {
            value: best_seen,
            kind: OptKind::BestKnown,
            method: "best-seen".into(),
        },
    })
}

fn relative_gap(value: f64, opt: f64) -> f64 {
    if opt > 0.0 {
        (value / opt - 1.0).max(0.0)
    } else if value == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn cmd_certify(cfg: &RunConfig) -> Result<Report> {
    let loss = cfg.loss_spec()?;
    let inst = load_instance(cfg, &loss)?;
    require_benchmark(&inst, cfg)?;
    let bench = inst.benchmark()?.clone();
    let k = cluster_count(&inst, cfg)?;
    let geo = summarize_geometry(&inst)?;
    let solve = lloyd(&inst.points, k, &loss, &lloyd_config(cfg))?;
    let bench_value = objective(&inst.points, &bench.partition, &bench.prototypes, &loss)?;
    let opt = reference_opt(&inst, k, &loss, &[solve.objective, bench_value])?;
    let gaps = GapReport::from_values(solve.objective, bench_value, opt.value, opt.kind)?;
    let (eta, eta_perm) = displacement(&solve.prototypes, &bench.prototypes)?;
    let inputs = BoundInputs::from_parts(&geo, &gaps, eta);
    let global = global_bound(&loss, &inputs)?;
    let (p, _) = misclassification_rate(&solve.partition, &bench.partition)?;
    let n = inst.n() as f64;

    let mut core_sweep = Vec::new();
    if geo.d_eff > 0.0 {
        for i in 0..CORE_GRID {
            let s = i as f64 / CORE_GRID as f64 * geo.d_eff;
            let cb = core_belt(&inst, s)?;
            let core_errors = cb
                .core_indices
                .iter()
                .filter(|&&i| eta_perm[solve.partition.labels()[i]] != bench.partition.labels()[i])
                .count();
            core_sweep.push(CoreEntry {
                s,
                core_size: cb.core_indices.len(),
                core_errors,
                certificate: local_core_bound(&loss, &inputs, s)?,
            });
        }
    }

    let tube = tube_entries(&solve, &bench.prototypes, &loss, &inputs, &gaps)?;
    let heterogeneous = match &cfg.weights {
        Some(path) => Some(heterogeneous_entry(path, &inst, &solve, &loss, &inputs)?),
        None => None,
    };

    let mut report = Report::new(cfg);
    let exact = opt.kind == OptKind::ExactOracle;
    let skip =
        |name: &str| AssertionOutcome::skipped(name, "no exact optimum for this instance size");
    if exact {
        report.assertions.push(AssertionOutcome::enforced(
            "global-bound",
            global.vacuous || within(p, global.bound_total),
            format!("p = {p}, bound = {}", global.bound_total),
        ));
        let worst = core_sweep
            .iter()
            .filter(|c| !c.certificate.vacuous)
            .find(|c| !within(c.core_errors as f64 / n, c.certificate.bound_total));
        report.assertions.push(AssertionOutcome::enforced(
            "core-bound",
            worst.is_none(),
            match worst {
                Some(c) => format!(
                    "{} core errors at s = {} exceed bound {}",
                    c.core_errors, c.s, c.certificate.bound_total
                ),
                None => format!("{} depths checked", core_sweep.len()),
            },
        ));
        let bad = tube
            .iter()
            .find(|t| !t.bound.vacuous && !within(t.hamming, t.bound.bound));
        report.assertions.push(AssertionOutcome::enforced(
            "tube-bound",
            bad.is_none(),
            match bad {
                Some(t) => format!(
                    "restarts {} and {}: distance {} > {}",
                    t.restart_a, t.restart_b, t.hamming, t.bound.bound
                ),
                None => format!("{} restart pairs checked", tube.len()),
            },
        ));
    } else {
        for name in ["global-bound", "core-bound", "tube-bound"] {
            report.assertions.push(skip(name));
        }
    }
    if heterogeneous.is_some() {
        report.assertions.push(AssertionOutcome::skipped(
            "heterogeneous-bound",
            "weighted optimum is best-known, not exact",
        ));
    }

    report.geometry = Some(geo);
    report.solve = Some(SolveSummary::from(&solve));
    report.certificates = Some(CertifySection {
        opt,
        gaps,
        eta,
        eta_permutation: eta_perm,
        measured_p: p,
        global,
        core_sweep,
        tube,
        heterogeneous,
    });
    Ok(report)
}

/// Pairs the best restart with every other restart.
fn tube_entries(
    solve: &SolveResult,
    anchors: &clustercert::Prototypes,
    loss: &LossSpec,
    inputs: &BoundInputs,
    gaps: &GapReport,
) -> Result<Vec<TubeEntry>> {
    let best = solve.best_restart;
    let Some(a) = solve.runs.get(best) else {
        return Ok(Vec::new());
    };
    let (eta_a, _) = displacement(&a.prototypes, anchors)?;
    let delta_a = relative_gap(a.objective, gaps.opt_value);
    let mut out = Vec::new();
    for (r, b) in solve.runs.iter().enumerate().filter(|(r, _)| *r != best) {
        let (eta_b, _) = displacement(&b.prototypes, anchors)?;
        let bound = hamming_tube_bound(
            loss,
            &TubeInputs {
                opt_n: inputs.opt_n,
                n: inputs.n,
                gamma: inputs.gamma,
                d_eff: inputs.d_eff,
                delta0: inputs.delta0,
                delta_approx: inputs.delta_approx,
                delta1: delta_a,
                delta2: relative_gap(b.objective, gaps.opt_value),
                eta1: eta_a,
                eta2: eta_b,
            },
        )?;
        out.push(TubeEntry {
            restart_a: best,
            restart_b: r,
            hamming: hamming_distance(&a.partition, &b.partition)?,
            bound,
        });
    }
    Ok(out)
}

/// Per-point weighted losses; gaps are taken against the best weighted
/// objective among the restarts and the benchmark.
fn heterogeneous_entry(
    path: &Path,
    inst: &Instance,
    solve: &SolveResult,
    loss: &LossSpec,
    inputs: &BoundInputs,
) -> Result<HeterogeneousEntry> {
    let weights = read_weights(path, inst.n())?;
    let losses: Vec<LossSpec> = weights
        .iter()
        .map(|&w| loss.clone().with_weight(w * loss.weight))
        .collect::<clustercert::Result<_>>()?;
    let bench = inst.benchmark()?;
    let value = |p, q| objective_per_point(&inst.points, p, q, &losses);
    let candidate = value(&solve.partition, &solve.prototypes)?;
    let bench_value = value(&bench.partition, &bench.prototypes)?;
    let mut best = candidate.min(bench_value);
    for run in &solve.runs {
        best = best.min(value(&run.partition, &run.prototypes)?);
    }
    let weighted = BoundInputs {
        opt_n: best,
        delta: relative_gap(candidate, best),
        delta_approx: relative_gap(bench_value, best),
        ..inputs.clone()
    };
    let (certificate, envelope) = heterogeneous_bound(&losses, &weighted)?;
    Ok(HeterogeneousEntry {
        certificate,
        envelope,
    })
}

pub fn cmd_diagnose(cfg: &RunConfig) -> Result<Report> {
    let loss = cfg.loss_spec()?;
    let inst = load_instance(cfg, &loss)?;
    let k = cluster_count(&inst, cfg)?;
    let solve = lloyd(&inst.points, k, &loss, &lloyd_config(cfg))?;
    let diag = diagnose(
        &inst.points,
        &solve,
        &loss,
        cfg.alpha,
        cfg.radius_mode(),
        None,
    )?;
    let mut report = Report::new(cfg);

    let (low, high) = (&diag.sensitivity[0], &diag.sensitivity[1]);
    report.assertions.push(AssertionOutcome::enforced(
        "guard-monotonicity",
        high.p_cert >= low.p_cert && high.kappa_hat >= low.kappa_hat,
        format!(
            "alpha {}: p_cert {}, alpha {}: p_cert {}",
            low.alpha, low.p_cert, high.alpha, high.p_cert
        ),
    ));

    let benchmark = match &inst.benchmark {
        Some(b) => {
            let (p, _) = misclassification_rate(&solve.partition, &b.partition)?;
            let covered = diag.vacuous || p <= diag.p_cert;
            report.assertions.push(AssertionOutcome::informational(
                "diagnostic-covers-benchmark",
                covered,
                format!("measured p = {p}, p_cert = {}", diag.p_cert),
            ));
            report.geometry = Some(summarize_geometry(&inst)?);
            Some(BenchmarkComparison {
                measured_p: p,
                p_cert: diag.p_cert,
                covered,
            })
        }
        None => None,
    };
    report.solve = Some(SolveSummary::from(&solve));
    report.diagnostics = Some(DiagnoseSection {
        report: diag,
        benchmark,
    });
    Ok(report)
}

fn write_table<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn cmd_phase(cfg: &RunConfig) -> Result<Report> {
    let loss = cfg.loss_spec()?;
    let layout = cfg.layout();
    let grid = PhaseGrid::default();
    let sweep = phase_sweep(&grid, &loss, layout)?;
    let per_ratio = grid.balances.len();

    let mut failure_cells = 0;
    let mut failure_violations = Vec::new();
    if layout == Layout::PointmassAdversarial {
        for (i, cell) in sweep.cells.iter().enumerate() {
            let (n1, n2) = cell_sizes(grid.n, grid.balances[i % per_ratio], layout)?;
            if cell.ratio < failure_ratio(n1, n2, &loss)? {
                failure_cells += 1;
                if cell.recovered {
                    failure_violations.push(CellRef {
                        ratio: cell.ratio,
                        c_b: cell.c_b,
                    });
                }
            }
        }
    }
    let sufficiency_violations: Vec<CellRef> = sweep
        .sufficiency_violations
        .iter()
        .map(|&i| CellRef {
            ratio: sweep.cells[i].ratio,
            c_b: sweep.cells[i].c_b,
        })
        .collect();
    let quarter = (threshold_kmeans(0.25)?, threshold_kmedian_1d(0.25)?);

    let mut report = Report::new(cfg);
    report.assertions.push(AssertionOutcome::enforced(
        "sufficiency",
        sufficiency_violations.is_empty(),
        format!(
            "{} sufficient cells not recovered",
            sufficiency_violations.len()
        ),
    ));
    if layout == Layout::PointmassAdversarial {
        report.assertions.push(AssertionOutcome::enforced(
            "failure-line",
            failure_violations.is_empty(),
            format!(
                "{} of {failure_cells} cells left of the failure line recovered",
                failure_violations.len()
            ),
        ));
    }
    report.assertions.push(AssertionOutcome::enforced(
        "threshold-crossing",
        quarter == (6.0, 6.0),
        format!("thresholds at balance 1/4: {quarter:?}"),
    ));

    if let Some(path) = &cfg.table {
        write_table(path, &sweep.cells)?;
    }
    report.phase = Some(PhaseSection {
        layout: layout.name().into(),
        loss: loss.name().into(),
        cells: sweep.cells.len(),
        recovered: sweep.cells.iter().filter(|c| c.recovered).count(),
        sufficient_cells: sweep.cells.iter().filter(|c| c.sufficient()).count(),
        sufficiency_violations,
        failure_line_cells: failure_cells,
        failure_line_violations: failure_violations,
        thresholds_at_quarter: quarter,
        grid,
        table: cfg.table.as_ref().map(|p| p.display().to_string()),
    });
    Ok(report)
}

pub fn cmd_track(cfg: &RunConfig) -> Result<Report> {
    let scenario = match &cfg.scenario {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            DriftScenario::from_json(&text)?
        }
        None => DriftScenario::slow_drift(),
    };
    let logs = run_tracking(&scenario)?;
    let mut report = Report::new(cfg);
    let over: Vec<usize> = logs
        .iter()
        .filter(|l| !l.within_bound)
        .map(|l| l.t)
        .collect();
    report.assertions.push(AssertionOutcome::enforced(
        "tracking-bound",
        over.is_empty(),
        format!("steps above the bound: {over:?}"),
    ));
    let broken: Vec<usize> = logs
        .iter()
        .filter(|l| !l.triangle_holds)
        .map(|l| l.t)
        .collect();
    report.assertions.push(AssertionOutcome::enforced(
        "eta-decomposition",
        broken.is_empty(),
        format!("steps breaking the triangle inequality: {broken:?}"),
    ));
    if let Some(path) = &cfg.table {
        write_table(path, &logs)?;
    }
    report.tracking = Some(TrackingSection {
        scenario: scenario.name.clone(),
        steps: logs.len(),
        non_vacuous_steps: logs.iter().filter(|l| !l.vacuous).count(),
        max_p: logs.iter().map(|l| l.p_t).fold(0.0, f64::max),
        logs,
        table: cfg.table.as_ref().map(|p| p.display().to_string()),
    });
    Ok(report)
}

/// Every partition of the input instance with `eta < gamma` is checked
/// against the global bound.
fn instance_soundness(inst: &Instance, loss: &LossSpec) -> Result<Tally> {
    if inst.n() > ENUMERATION_LIMIT {
        return Err(clustercert::Error::EnumerationBudget {
            n: inst.n(),
            limit: ENUMERATION_LIMIT,
        }
        .into());
    }
    let bench = inst.benchmark()?;
    let geo = summarize_geometry(inst)?;
    let k = bench.partition.k();
    let all = enumerate_profiled(&inst.points, k, loss, clustercert::Feasibility::Free)?;
    let opt = all.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
    let bench_value = objective(&inst.points, &bench.partition, &bench.prototypes, loss)?;
    let mut t = Tally::new("instance-bound-soundness");
    for (part, protos, value) in &all {
        t.bump("partitions", 1);
        let (eta, _) = displacement(protos, &bench.prototypes)?;
        if !(eta < geo.gamma) {
            continue;
        }
        let gaps = GapReport::from_values(*value, bench_value, opt, OptKind::ExactOracle)?;
        let cert = global_bound(loss, &BoundInputs::from_parts(&geo, &gaps, eta))?;
        let (p, _) = misclassification_rate(part, &bench.partition)?;
        t.record(within(p, cert.bound_total), || {
            format!(
                "labels {:?}: p = {p} > bound {}",
                part.one_based(),
                cert.bound_total
            )
        });
    }
    Ok(t)
}

pub fn cmd_oracle(cfg: &RunConfig) -> Result<Report> {
    let suites = match &cfg.input {
        Some(_) => {
            let loss = cfg.loss_spec()?;
            let inst = load_instance(cfg, &loss)?;
            require_benchmark(&inst, cfg)?;
            vec![instance_soundness(&inst, &loss)?]
        }
        None => run_default_suite(cfg.seed)?.suites,
    };
    let mut report = Report::new(cfg);
    for s in &suites {
        report.assertions.push(AssertionOutcome::enforced(
            &s.name,
            s.passed(),
            match &s.first_violation {
                Some(v) => format!("{} of {} cases violated; first: {v}", s.violations, s.cases),
                None => format!("{} cases", s.cases),
            },
        ));
    }
    report.oracle = Some(OracleSection {
        total_cases: suites.iter().map(|s| s.cases).sum(),
        total_violations: suites.iter().map(|s| s.violations).sum(),
        suites,
    });
    Ok(report)
}
