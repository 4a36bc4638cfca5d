use clap::{Args, Parser, Subcommand};
use clustercert_cli::{
    run, Command, LayoutChoice, LossChoice, RadiusChoice, Report, RunConfig, EXIT_ASSERTION,
    EXIT_PRECONDITION,
};
use std::path::PathBuf;
use std::process::ExitCode;

/// Stability certificates for prototype-based clustering.
#[derive(Parser)]
#[command(name = "cluster-certify", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Sub {
    /// Exact-oracle gaps, displacement and misclassification certificates.
    Certify,
    /// Data-driven certificate from multi-start restarts.
    Diagnose,
    /// Exact-recovery sweep over separation ratio and balance.
    Phase,
    /// Warm-started tracking under anchor drift.
    Track,
    /// Brute-force verification suites.
    Oracle,
}

#[derive(Args)]
struct Common {
    /// Dataset CSV: coordinate columns and an optional 1-based "label" column.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// JSON array of benchmark prototype rows.
    #[arg(long, global = true)]
    prototypes: Option<PathBuf>,
    /// CSV with a "weight" column for per-point losses.
    #[arg(long, global = true)]
    weights: Option<PathBuf>,
    /// Drift scenario JSON for `track`.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "squared", global = true)]
    loss: LossChoice,
    /// Huber threshold.
    #[arg(long, global = true)]
    tau: Option<f64>,
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, default_value_t = 10, global = true)]
    restarts: usize,
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Margin guard of the diagnostic.
    #[arg(long, default_value_t = 0.2, global = true)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "max", global = true)]
    radius: RadiusChoice,
    /// Layout of `phase` sweeps.
    #[arg(long, value_enum, default_value = "collinear", global = true)]
    layout: LayoutChoice,
    /// Report path; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// CSV table for `phase` cells or `track` steps.
    #[arg(long, global = true)]
    table: Option<PathBuf>,
    /// Exit with status 3 when a checked bound fails.
    #[arg(long = "assert", value_parser = ["on", "off"], default_value = "on", global = true)]
    assertions: String,
}

fn config(cli: Cli) -> RunConfig {
    let command = match cli.command {
        Sub::Certify => Command::Certify,
        Sub::Diagnose => Command::Diagnose,
        Sub::Phase => Command::Phase,
        Sub::Track => Command::Track,
        Sub::Oracle => Command::Oracle,
    };
    let c = cli.common;
    RunConfig {
        command,
        input: c.input,
        prototypes: c.prototypes,
        weights: c.weights,
        scenario: c.scenario,
        loss: c.loss,
        tau: c.tau,
        k: c.k,
        restarts: c.restarts,
        seed: c.seed,
        alpha: c.alpha,
        radius: c.radius,
        layout: c.layout,
        out: c.out,
        table: c.table,
        assertions: c.assertions == "on",
    }
}

fn emit(report: &Report, cfg: &RunConfig) -> Result<(), String> {
    let text = report.to_json().map_err(|e| e.to_string())?;
    match &cfg.out {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cfg = config(Cli::parse());
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Err(e) = emit(&report, &cfg) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_PRECONDITION as u8);
    }
    let violations = report.violations();
    for v in &violations {
        eprintln!("assertion failed: {}: {}", v.name, v.detail);
    }
    if cfg.assertions && !violations.is_empty() {
        return ExitCode::from(EXIT_ASSERTION as u8);
    }
    ExitCode::SUCCESS
}
