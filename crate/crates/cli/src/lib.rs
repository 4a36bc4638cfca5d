//! Command-line front end: dataset ingestion, command dispatch and
//! versioned JSON reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;
pub mod report;

pub use commands::{cmd_certify, cmd_diagnose, cmd_oracle, cmd_phase, cmd_track, run};
pub use config::{Command, LayoutChoice, LossChoice, RadiusChoice, RunConfig};
pub use error::{CliError, Result, EXIT_ASSERTION, EXIT_INTERNAL, EXIT_PRECONDITION};
pub use ingest::ingest_csv;
pub use report::{Report, SCHEMA_VERSION};
