//! Stability certificates for prototype-based clustering.
//!
//! The crate computes the benchmark geometry of a clustering instance, the
//! condition numbers and misclassification bounds derived from it, and exact
//! small-scale oracles (enumeration, 1D dynamic programming) used to check
//! those bounds.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod assignment;
pub mod certify;
pub mod clustering;
pub mod combinatorics;
pub mod error;
pub mod geometry;
pub mod loss;
pub mod oracle;
pub mod partition;
pub mod phase;
pub mod real;
pub mod tracking;

pub use error::{Error, Result};
pub use geometry::{Benchmark, Feasibility, GeometrySummary, Instance, Points, Prototypes};
pub use loss::{LossKind, LossSpec};
pub use partition::{Matching, Partition};
