//! Validated run configuration shared by every command.

use crate::error::{CliError, Result};
use clap::ValueEnum;
use clustercert::certify::RadiusMode;
use clustercert::phase::Layout;
use clustercert::LossSpec;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Certify,
    Diagnose,
    Phase,
    Track,
    Oracle,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Certify => "certify",
            Command::Diagnose => "diagnose",
            Command::Phase => "phase",
            Command::Track => "track",
            Command::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LossChoice {
    Squared,
    Linear,
    Huber,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RadiusChoice {
    Max,
    Q95,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LayoutChoice {
    Collinear,
    Adversarial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    /// Dataset CSV.
    pub input: Option<PathBuf>,
    /// JSON array of benchmark prototype rows.
    pub prototypes: Option<PathBuf>,
    /// CSV with a `weight` column, one row per point.
    pub weights: Option<PathBuf>,
    /// Drift scenario JSON; the shipped slow-drift scenario when absent.
    pub scenario: Option<PathBuf>,
    pub loss: LossChoice,
    pub tau: Option<f64>,
    /// Number of clusters; the benchmark's when absent.
    pub k: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
    pub alpha: f64,
    pub radius: RadiusChoice,
    pub layout: LayoutChoice,
    /// Report path; standard output when absent.
    pub out: Option<PathBuf>,
    /// CSV table written by `phase` and `track`.
    pub table: Option<PathBuf>,
    pub assertions: bool,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            input: None,
            prototypes: None,
            weights: None,
            scenario: None,
            loss: LossChoice::Squared,
            tau: None,
            k: None,
            restarts: 10,
            seed: 0,
            alpha: 0.2,
            radius: RadiusChoice::Max,
            layout: LayoutChoice::Collinear,
            out: None,
            table: None,
            assertions: true,
        }
    }

    /// Checks every numeric flag and the inputs the command needs.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        match (self.loss, self.tau) {
            (LossChoice::Huber, None) => return bad("--loss huber needs --tau".into()),
            (LossChoice::Huber, Some(t)) if !(t > 0.0 && t.is_finite()) => {
                return bad(format!("--tau must be positive and finite, got {t}"))
            }
            (LossChoice::Squared | LossChoice::Linear, Some(_)) => {
                return bad("--tau only applies to --loss huber".into())
            }
            _ => {}
        }
        if self.k == Some(0) {
            return bad("--k must be at least 1".into());
        }
        if self.restarts == 0 {
            return bad("--restarts must be at least 1".into());
        }
        if self.command == Command::Diagnose && self.restarts < 2 {
            return bad(format!(
                "diagnose needs --restarts >= 2, got {}",
                self.restarts
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("--alpha must lie in (0, 1), got {}", self.alpha));
        }
        if matches!(self.command, Command::Certify | Command::Diagnose) && self.input.is_none() {
            return bad(format!("{} needs --input", self.command.name()));
        }
        if self.command == Command::Phase && self.loss == LossChoice::Huber {
            return bad("phase sweeps support --loss squared or linear".into());
        }
        Ok(())
    }

    pub fn loss_spec(&self) -> Result<LossSpec> {
        Ok(match self.loss {
            LossChoice::Squared => LossSpec::squared(),
            LossChoice::Linear => LossSpec::linear(),
            LossChoice::Huber => LossSpec::huber(self.tau.unwrap_or(f64::NAN))?,
        })
    }

    pub fn radius_mode(&self) -> RadiusMode {
        match self.radius {
            RadiusChoice::Max => RadiusMode::Max,
            RadiusChoice::Q95 => RadiusMode::q95(),
        }
    }

    pub fn layout(&self) -> Layout {
        match self.layout {
            LayoutChoice::Collinear => Layout::Collinear1d,
            LayoutChoice::Adversarial => Layout::PointmassAdversarial,
        }
    }
}
