//! Machine-readable reports. Non-finite reals are written as the strings
//! `"inf"`, `"-inf"` and `"nan"`.

use crate::config::{Command, RunConfig};
use clustercert::certify::{Certificate, DiagnosticReport, EnvelopeSummary, TubeBound};
use clustercert::clustering::{Exactness, GapReport, OptKind, SolveResult};
use clustercert::oracle::Tally;
use clustercert::phase::PhaseGrid;
use clustercert::tracking::StepLog;
use clustercert::GeometrySummary;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: &str = "cluster-certify/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub command: Command,
    pub config: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometrySummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificates: Option<CertifySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<DiagnoseSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<PhaseSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tracking: Option<TrackingSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
    pub assertions: Vec<AssertionOutcome>,
    pub timing: Timing,
}

impl Report {
    pub fn new(config: &RunConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            command: config.command,
            config: config.clone(),
            geometry: None,
            solve: None,
            certificates: None,
            diagnostics: None,
            phase: None,
            tracking: None,
            oracle: None,
            assertions: Vec::new(),
            timing: Timing::default(),
        }
    }

    /// Enforced assertions that were checked and failed.
    pub fn violations(&self) -> Vec<&AssertionOutcome> {
        self.assertions
            .iter()
            .filter(|a| a.enforced && a.checked && !a.holds)
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// The report as a JSON value with the timing block removed, for
    /// reproducibility comparisons.
    pub fn without_timing(&self) -> serde_json::Result<serde_json::Value> {
        let mut v = serde_json::to_value(self)?;
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timing");
        }
        Ok(v)
    }
}

/// One named check. `checked` is false when its preconditions did not hold
/// (for example no exact optimum); unenforced checks are informational.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssertionOutcome {
    pub name: String,
    pub enforced: bool,
    pub checked: bool,
    pub holds: bool,
    pub detail: String,
}

impl AssertionOutcome {
    pub fn enforced(name: &str, holds: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            enforced: true,
            checked: true,
            holds,
            detail: detail.into(),
        }
    }

    pub fn informational(name: &str, holds: bool, detail: impl Into<String>) -> Self {
        Self {
            enforced: false,
            ..Self::enforced(name, holds, detail)
        }
    }

    pub fn skipped(name: &str, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            enforced: true,
            checked: false,
            holds: true,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub method: String,
    pub exactness: Exactness,
    pub objective: f64,
    pub restarts_used: usize,
    pub per_restart_objectives: Vec<f64>,
    pub best_restart: usize,
    pub seed: u64,
    /// 1-based labels of the reported solution.
    pub labels: Vec<usize>,
    pub prototypes: Vec<Vec<f64>>,
}

impl From<&SolveResult> for SolveSummary {
    fn from(r: &SolveResult) -> Self {
        Self {
            method: r.method.clone(),
            exactness: r.exactness,
            objective: r.objective,
            restarts_used: r.restarts_used,
            per_restart_objectives: r.per_restart_objectives.clone(),
            best_restart: r.best_restart,
            seed: r.seed,
            labels: r.partition.one_based(),
            prototypes: r.prototypes.points.to_rows(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptReference {
    pub value: f64,
    pub kind: OptKind,
    pub method: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreEntry {
    pub s: f64,
    pub core_size: usize,
    /// Core points whose matched prototype is not their benchmark anchor.
    pub core_errors: usize,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeEntry {
    pub restart_a: usize,
    pub restart_b: usize,
    pub hamming: f64,
    pub bound: TubeBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeterogeneousEntry {
    pub certificate: Certificate,
    pub envelope: EnvelopeSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifySection {
    pub opt: OptReference,
    pub gaps: GapReport,
    pub eta: f64,
    pub eta_permutation: Vec<usize>,
    pub measured_p: f64,
    pub global: Certificate,
    pub core_sweep: Vec<CoreEntry>,
    pub tube: Vec<TubeEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heterogeneous: Option<HeterogeneousEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkComparison {
    pub measured_p: f64,
    #[serde(with = "clustercert::real")]
    pub p_cert: f64,
    /// `p_cert >= measured_p`, or the certificate is vacuous.
    pub covered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnoseSection {
    pub report: DiagnosticReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benchmark: Option<BenchmarkComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRef {
    pub ratio: f64,
    pub c_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSection {
    pub layout: String,
    pub loss: String,
    pub grid: PhaseGrid,
    pub cells: usize,
    pub recovered: usize,
    pub sufficient_cells: usize,
    pub sufficiency_violations: Vec<CellRef>,
    /// Adversarial layout: cells strictly left of the closed-form failure line.
    pub failure_line_cells: usize,
    pub failure_line_violations: Vec<CellRef>,
    /// Both sufficient thresholds at balance 1/4.
    pub thresholds_at_quarter: (f64, f64),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingSection {
    pub scenario: String,
    pub steps: usize,
    pub non_vacuous_steps: usize,
    pub max_p: f64,
    pub logs: Vec<StepLog>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSection {
    pub suites: Vec<Tally>,
    pub total_cases: u64,
    pub total_violations: u64,
}
