//! Acceptance suite: every criterion at its tolerance and runtime limit.
//! Prints one PASS/FAIL line per criterion and exits non-zero on any failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use clustercert::oracle::{
    bound_soundness_suite, core_belt_suite, eta_kmeans_suite, eta_medoid_suite,
    hamming_metric_fuzz, increment_closed_form_suite, kappa_identity_suite, tube_suite,
    SuiteConfig, Tally,
};
use clustercert::phase::{
    adversarial_case, generate_two_ball, merge_penalty_fuzz, mixing_coefficient_exhaustive,
    phase_sweep, threshold_kmeans, threshold_kmedian_1d, Layout, PhaseGrid, TwoBallConfig,
};
use clustercert::tracking::{run_tracking, DriftScenario};
use clustercert::LossSpec;
use clustercert_cli::{run, Command, RunConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

const SEED: u64 = 2024;

type Outcome = Result<String, String>;

fn tallies(ts: &[Tally]) -> Outcome {
    let mut summary = String::new();
    for t in ts {
        if !t.passed() {
            return Err(format!(
                "{}: {} of {} violated; first: {}",
                t.name,
                t.violations,
                t.cases,
                t.first_violation.as_deref().unwrap_or("?")
            ));
        }
        let _ = write!(summary, "{}: {} cases; ", t.name, t.cases);
    }
    Ok(summary.trim_end_matches("; ").to_string())
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn increment_closed_forms() -> Outcome {
    tallies(&[increment_closed_form_suite(1000, 10_000, SEED).map_err(err)?])
}

fn condition_number_identities() -> Outcome {
    tallies(&[kappa_identity_suite(1000, SEED).map_err(err)?])
}

fn global_bound_soundness() -> Outcome {
    let t = bound_soundness_suite(&SuiteConfig::default()).map_err(err)?;
    if t.counter("instances") < 200 {
        return Err(format!("only {} instances", t.counter("instances")));
    }
    tallies(&[t])
}

fn phase_transitions() -> Outcome {
    let grid = PhaseGrid::default();
    let mut summary = String::new();
    for loss in [LossSpec::squared(), LossSpec::linear()] {
        let sweep = phase_sweep(&grid, &loss, Layout::Collinear1d).map_err(err)?;
        let sufficient = sweep.cells.iter().filter(|c| c.sufficient()).count();
        if let Some(&i) = sweep.sufficiency_violations.first() {
            let c = &sweep.cells[i];
            return Err(format!(
                "{}: sufficient cell ratio {} c_b {} not recovered",
                loss.name(),
                c.ratio,
                c.c_b
            ));
        }
        if sufficient == 0 {
            return Err(format!("{}: no sufficient cells on the grid", loss.name()));
        }
        let _ = write!(
            summary,
            "{} {sufficient}/{} sufficient cells recovered; ",
            loss.name(),
            sweep.cells.len()
        );
    }
    let (km, kmed) = (
        threshold_kmeans(0.25).map_err(err)?,
        threshold_kmedian_1d(0.25).map_err(err)?,
    );
    if km != 6.0 || kmed != 6.0 {
        return Err(format!("thresholds at 1/4 are {km} and {kmed}"));
    }
    for &c in &grid.balances {
        let (a, b) = (
            threshold_kmeans(c).map_err(err)?,
            threshold_kmedian_1d(c).map_err(err)?,
        );
        let expected = c.partial_cmp(&0.25).unwrap().reverse();
        if b.partial_cmp(&a).unwrap() != expected {
            return Err(format!(
                "thresholds at c_b {c} are ordered wrongly: {a} vs {b}"
            ));
        }
    }
    Ok(summary + "thresholds cross at (6, 0.25)")
}

fn tightness() -> Outcome {
    let sq = adversarial_case(4, 36, 1.0, 3.9, &LossSpec::squared()).map_err(err)?;
    if !(sq.split_cost < sq.correct_cost) || sq.recovered {
        return Err(format!("squared at 3.9: {sq:?}"));
    }
    let mut checked = 0;
    let near_line = [9.95, 9.99, 9.999];
    for ratio in (11..100).map(|i| i as f64 / 10.0).chain(near_line) {
        let lin = adversarial_case(4, 36, 1.0, ratio, &LossSpec::linear()).map_err(err)?;
        if !(lin.split_cost < lin.correct_cost) || lin.recovered {
            return Err(format!("linear at ratio {ratio}: {lin:?}"));
        }
        checked += 1;
    }
    Ok(format!(
        "squared split {:.2} < {:.2}, not recovered; linear fails at all {checked} ratios below 10",
        sq.split_cost, sq.correct_cost
    ))
}

fn lemma_oracles() -> Outcome {
    tallies(&[
        merge_penalty_fuzz(1000, SEED).map_err(err)?,
        mixing_coefficient_exhaustive(20).map_err(err)?,
    ])
}

fn core_belt() -> Outcome {
    let t = core_belt_suite(&SuiteConfig::default()).map_err(err)?;
    if t.counter("zero-error-certificates") == 0 {
        return Err("no instance produced a zero-error certificate".into());
    }
    let certs = t.counter("zero-error-certificates");
    tallies(&[t]).map(|s| format!("{s}; {certs} zero-error certificates"))
}

fn eta_control() -> Outcome {
    let cfg = SuiteConfig::default();
    let medoid = eta_medoid_suite(&cfg).map_err(err)?;
    if medoid.counter("eta-zero-certificates") == 0 {
        return Err("no medoid instance was certified".into());
    }
    tallies(&[eta_kmeans_suite(&cfg).map_err(err)?, medoid])
}

fn hamming_tube() -> Outcome {
    tallies(&[
        tube_suite(&SuiteConfig::default()).map_err(err)?,
        hamming_metric_fuzz(10_000, SEED).map_err(err)?,
    ])
}

fn diagnostics() -> Outcome {
    let dir = tempfile::tempdir().map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut non_vacuous, mut covered) = (0, 0);
    for i in 0..50 {
        let inst = generate_two_ball(&TwoBallConfig {
            n1: rng.gen_range(10..=30),
            n2: rng.gen_range(10..=30),
            radius: 1.0,
            delta: rng.gen_range(6.0..12.0),
            layout: Layout::UniformInBall {
                seed: rng.gen(),
                d: 2,
            },
        })
        .map_err(err)?;
        let labels = inst.benchmark().map_err(err)?.partition.one_based();
        let mut text = String::from("x1,x2,label\n");
        for (row, l) in inst.points.rows().zip(labels) {
            let _ = writeln!(text, "{:?},{:?},{l}", row[0], row[1]);
        }
        let path = dir.path().join(format!("instance{i}.csv"));
        std::fs::write(&path, text).map_err(err)?;
        let cfg = RunConfig {
            input: Some(path),
            restarts: 16,
            seed: i,
            ..RunConfig::new(Command::Diagnose)
        };
        let report = run(&cfg).map_err(err)?;
        if let Some(a) = report
            .assertions
            .iter()
            .find(|a| a.name == "guard-monotonicity" && !a.holds)
        {
            return Err(format!("instance {i}: {}", a.detail));
        }
        let d = report.diagnostics.ok_or("missing diagnostics")?;
        let cmp = d.benchmark.ok_or("missing benchmark comparison")?;
        if !d.report.vacuous {
            non_vacuous += 1;
            if cmp.p_cert < cmp.measured_p {
                return Err(format!(
                    "instance {i}: p_cert {} < measured p {}",
                    cmp.p_cert, cmp.measured_p
                ));
            }
            covered += 1;
        }
    }
    Ok(format!(
        "{covered}/{non_vacuous} non-vacuous instances covered; guard monotone on 50"
    ))
}

fn tracking() -> Outcome {
    let scenario = DriftScenario::slow_drift();
    let logs = run_tracking(&scenario).map_err(err)?;
    if logs.len() != 20 || scenario.cluster_sizes.iter().sum::<usize>() != 10 {
        return Err("unexpected scenario shape".into());
    }
    for l in &logs {
        if !l.triangle_holds {
            return Err(format!(
                "step {}: {} > {} + {}",
                l.t, l.eta_measured, l.eta_alg, l.eta_drift
            ));
        }
        if !l.vacuous && l.p_t > l.bound_t {
            return Err(format!("step {}: p {} > bound {}", l.t, l.p_t, l.bound_t));
        }
    }
    let non_vacuous = logs.iter().filter(|l| !l.vacuous).count();
    Ok(format!(
        "{non_vacuous}/20 non-vacuous steps within bound; decomposition holds at every step"
    ))
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    check: fn() -> Outcome,
}

fn main() {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion {
            id: 1,
            name: "increment closed forms",
            limit: secs(5),
            check: increment_closed_forms,
        },
        Criterion {
            id: 2,
            name: "condition-number identities",
            limit: secs(1),
            check: condition_number_identities,
        },
        Criterion {
            id: 3,
            name: "global bound soundness",
            limit: secs(120),
            check: global_bound_soundness,
        },
        Criterion {
            id: 4,
            name: "phase transitions",
            limit: secs(300),
            check: phase_transitions,
        },
        Criterion {
            id: 5,
            name: "tightness constructions",
            limit: secs(30),
            check: tightness,
        },
        Criterion {
            id: 6,
            name: "merge and mixing lemmas",
            limit: secs(60),
            check: lemma_oracles,
        },
        Criterion {
            id: 7,
            name: "core-belt certificates",
            limit: secs(60),
            check: core_belt,
        },
        Criterion {
            id: 8,
            name: "displacement control",
            limit: secs(120),
            check: eta_control,
        },
        Criterion {
            id: 9,
            name: "hamming tube and metric",
            limit: secs(60),
            check: hamming_tube,
        },
        Criterion {
            id: 10,
            name: "restart diagnostics",
            limit: secs(120),
            check: diagnostics,
        },
        Criterion {
            id: 11,
            name: "drift tracking",
            limit: secs(120),
            check: tracking,
        },
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for c in &criteria {
        let label = format!("criterion {:>2}: {}", c.id, c.name);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let timing = format!("{:.2}s / {}s", elapsed.as_secs_f64(), c.limit.as_secs());
        let verdict = match outcome {
            Ok(detail) if elapsed <= c.limit => format!("PASS {label} [{timing}] {detail}"),
            Ok(detail) => format!("FAIL {label} [{timing}] over the runtime limit; {detail}"),
            Err(why) => format!("FAIL {label} [{timing}] {why}"),
        };
        if verdict.starts_with("FAIL") {
            failed += 1;
        }
        println!("{verdict}");
    }
    println!("acceptance: {} criteria failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
