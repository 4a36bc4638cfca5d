use clustercert::phase::{generate_two_ball, Layout, TwoBallConfig};
use clustercert_cli::{run, Command, Report, RunConfig, EXIT_PRECONDITION};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::File::create(&path)
        .unwrap()
        .write_all(text.as_bytes())
        .unwrap();
    path
}

fn two_pairs(dir: &Path) -> PathBuf {
    write(dir, "pairs.csv", "x1,label\n0,1\n0.1,1\n10,2\n10.1,2\n")
}

/// A generated two-ball dataset in CSV form with its generating labels.
fn generated(dir: &Path, seed: u64, delta: f64) -> PathBuf {
    let inst = generate_two_ball(&TwoBallConfig {
        n1: 12,
        n2: 18,
        radius: 1.0,
        delta,
        layout: Layout::UniformInBall { seed, d: 2 },
    })
    .unwrap();
    let labels = inst.benchmark().unwrap().partition.one_based();
    let mut text = String::from("x1,x2,label\n");
    for (row, l) in inst.points.rows().zip(labels) {
        text.push_str(&format!("{},{},{l}\n", row[0], row[1]));
    }
    write(dir, &format!("gen{seed}.csv"), &text)
}

fn config(command: Command, input: Option<PathBuf>) -> RunConfig {
    RunConfig {
        input,
        restarts: 6,
        seed: 5,
        ..RunConfig::new(command)
    }
}

#[test]
fn certify_at_the_optimum_gives_a_zero_bound() {
    let dir = tempfile::tempdir().unwrap();
    let report = run(&config(Command::Certify, Some(two_pairs(dir.path())))).unwrap();
    let c = report.certificates.as_ref().unwrap();
    assert_eq!(c.gaps.delta, 0.0);
    assert_eq!(c.gaps.delta_approx, 0.0);
    assert_eq!(c.eta, 0.0);
    assert_eq!(c.global.bound_total, 0.0);
    assert_eq!(c.measured_p, 0.0);
    assert_eq!(c.core_sweep.len(), 10);
    assert!(report.assertions.iter().all(|a| a.checked && a.holds));
}

#[test]
fn certify_needs_labels() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "plain.csv", "x1\n0\n1\n5\n");
    let err = run(&config(Command::Certify, Some(input))).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_PRECONDITION);
    assert!(err.to_string().contains("label"));
}

#[test]
fn certify_reports_the_weighted_bound() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(Command::Certify, Some(two_pairs(dir.path())));
    cfg.weights = Some(write(dir.path(), "w.csv", "weight\n1\n2\n1\n2\n"));
    let report = run(&cfg).unwrap();
    let het = report.certificates.unwrap().heterogeneous.unwrap();
    assert!(!het.certificate.vacuous);
    assert!(het.envelope.kappa_het.is_finite());
}

#[test]
fn diagnose_on_separable_data() {
    let dir = tempfile::tempdir().unwrap();
    let report = run(&config(
        Command::Diagnose,
        Some(generated(dir.path(), 3, 8.0)),
    ))
    .unwrap();
    let d = report.diagnostics.as_ref().unwrap();
    assert!(d.report.kappa_hat.is_finite());
    assert!(d.report.p_cert.is_finite());
    assert!(d.benchmark.as_ref().unwrap().covered);
    assert!(report.violations().is_empty());
}

#[test]
fn diagnose_without_labels_needs_k() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "plain.csv", "x1\n0\n0.2\n9\n9.1\n");
    let mut cfg = config(Command::Diagnose, Some(input));
    assert!(run(&cfg).is_err());
    cfg.k = Some(2);
    let report = run(&cfg).unwrap();
    assert!(report.diagnostics.unwrap().benchmark.is_none());
}

#[test]
fn oracle_on_an_input_instance() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "small.csv",
        "x1,label\n0,1\n0.5,1\n1,1\n5,2\n5.6,2\n6,2\n",
    );
    let report = run(&config(Command::Oracle, Some(input))).unwrap();
    let o = report.oracle.unwrap();
    assert_eq!(o.total_violations, 0);
    assert!(o.total_cases > 0);

    let big: String = (0..13).map(|i| format!("{i},{}\n", 1 + i / 7)).collect();
    let input = write(dir.path(), "big.csv", &format!("x1,label\n{big}"));
    let err = run(&config(Command::Oracle, Some(input))).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_PRECONDITION);
}

#[test]
fn track_writes_a_step_table() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(Command::Track, None);
    cfg.table = Some(dir.path().join("steps.csv"));
    let report = run(&cfg).unwrap();
    assert_eq!(report.tracking.as_ref().unwrap().steps, 20);
    let text = std::fs::read_to_string(dir.path().join("steps.csv")).unwrap();
    assert_eq!(text.lines().count(), 21);
    assert!(text.starts_with("t,eta_alg,eta_drift"));
}

#[test]
fn reports_round_trip_including_infinities() {
    let dir = tempfile::tempdir().unwrap();
    // Overlapping clusters: the margin is negative and every bound is vacuous.
    let input = write(dir.path(), "overlap.csv", "x1,label\n0,1\n3,1\n2,2\n5,2\n");
    let report = run(&config(Command::Certify, Some(input))).unwrap();
    let c = report.certificates.as_ref().unwrap();
    assert!(c.global.vacuous);
    let text = report.to_json().unwrap();
    assert!(text.contains("\"inf\""));
    assert_eq!(Report::from_json(&text).unwrap(), report);
}

#[test]
fn identical_config_gives_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(Command::Certify, Some(generated(dir.path(), 9, 5.0)));
    let mut a = run(&cfg).unwrap();
    let mut b = run(&cfg).unwrap();
    assert_eq!(a.without_timing().unwrap(), b.without_timing().unwrap());
    a.timing.elapsed_seconds = 0.0;
    b.timing.elapsed_seconds = 0.0;
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}

#[test]
fn binary_exit_codes_and_output() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_cluster-certify");
    let out = dir.path().join("report.json");
    let status = Process::new(bin)
        .args(["certify", "--input"])
        .arg(two_pairs(dir.path()))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report = Report::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report.schema_version, "cluster-certify/1");

    let plain = write(dir.path(), "plain.csv", "x1\n0\n1\n");
    let output = Process::new(bin)
        .args(["certify", "--input"])
        .arg(plain)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));

    let output = Process::new(bin)
        .args(["diagnose", "--alpha", "1.5"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("--alpha"));

    let ragged = write(dir.path(), "ragged.csv", "x1,x2\n0,0\n1\n");
    let output = Process::new(bin)
        .args(["diagnose", "--k", "2", "--input"])
        .arg(ragged)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("row 2"));
}
