//! CSV datasets, benchmark prototype sidecars and per-point weights.
//!
//! A dataset has a header row. Every column except `label` is a coordinate,
//! in header order (conventionally `x1..xd`). The optional `label` column
//! holds 1-based benchmark labels.

use crate::error::{CliError, Result};
use clustercert::clustering::best_response_prototypes;
use clustercert::{Feasibility, Instance, LossSpec, Partition, Points, Prototypes};
use std::path::Path;

/// Header of the optional benchmark label column.
pub const LABEL_COLUMN: &str = "label";

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

/// Parsed rows and optional 1-based labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub points: Points,
    pub labels: Option<Vec<usize>>,
}

pub fn read_table(path: &Path) -> Result<Table> {
    let mut rdr = reader(path)?;
    let header = rdr
        .headers()
        .map_err(|e| CliError::input(path, format!("unreadable header: {e}")))?
        .clone();
    let label_col = header.iter().position(|h| h == LABEL_COLUMN);
    let coord_cols: Vec<usize> = (0..header.len())
        .filter(|&c| Some(c) != label_col)
        .collect();
    if coord_cols.is_empty() {
        return Err(CliError::input(path, "no coordinate columns in the header"));
    }
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| CliError::input(path, format!("row {row}: {e}")))?;
        if rec.len() != header.len() {
            return Err(CliError::input(
                path,
                format!(
                    "row {row} has {} fields, expected {}",
                    rec.len(),
                    header.len()
                ),
            ));
        }
        for &c in &coord_cols {
            let v: f64 = rec[c].parse().map_err(|_| {
                CliError::input(
                    path,
                    format!(
                        "row {row}, column {:?}: {:?} is not a number",
                        &header[c], &rec[c]
                    ),
                )
            })?;
            if !v.is_finite() {
                return Err(CliError::input(
                    path,
                    format!("row {row}, column {:?}: non-finite value", &header[c]),
                ));
            }
            data.push(v);
        }
        if let Some(c) = label_col {
            let l: usize = rec[c].parse().ok().filter(|&l| l >= 1).ok_or_else(|| {
                CliError::input(
                    path,
                    format!("row {row}: label {:?} is not a positive integer", &rec[c]),
                )
            })?;
            labels.push(l);
        }
    }
    if data.is_empty() {
        return Err(CliError::input(path, "dataset has no rows"));
    }
    Ok(Table {
        points: Points::new(coord_cols.len(), data)?,
        labels: label_col.map(|_| labels),
    })
}

/// Reads a dataset. With a label column the benchmark prototypes are the
/// loss-specific best responses of the labelled clusters.
pub fn ingest_csv(path: &Path, loss: &LossSpec) -> Result<Instance> {
    let table = read_table(path)?;
    let mut inst = Instance::new(table.points)?;
    if let Some(labels) = table.labels {
        let partition = Partition::from_one_based(&labels)?;
        if let Some(j) = partition.sizes().iter().position(|&s| s == 0) {
            return Err(CliError::input(
                path,
                format!("benchmark cluster {} has no points", j + 1),
            ));
        }
        let protos = best_response_prototypes(&inst.points, &partition, loss, Feasibility::Free)?;
        inst.set_benchmark(partition, protos)?;
    }
    Ok(inst)
}

/// Replaces the benchmark anchors with prototypes read from a JSON array of
/// rows, one per benchmark cluster in label order.
pub fn attach_prototypes(inst: &mut Instance, path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let rows: Vec<Vec<f64>> = serde_json::from_str(&text)
        .map_err(|e| CliError::input(path, format!("expected an array of rows: {e}")))?;
    let partition = inst
        .benchmark
        .as_ref()
        .map(|b| b.partition.clone())
        .ok_or_else(|| {
            CliError::input(
                path,
                "benchmark prototypes need a label column in the dataset",
            )
        })?;
    inst.set_benchmark(partition, Prototypes::from_rows(&rows)?)?;
    Ok(())
}

/// Per-point weights from a CSV with a `weight` column.
pub fn read_weights(path: &Path, n: usize) -> Result<Vec<f64>> {
    let mut rdr = reader(path)?;
    let header = rdr
        .headers()
        .map_err(|e| CliError::input(path, format!("unreadable header: {e}")))?
        .clone();
    let col = header
        .iter()
        .position(|h| h == "weight")
        .ok_or_else(|| CliError::input(path, "missing a \"weight\" column"))?;
    let mut out = Vec::with_capacity(n);
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::input(path, format!("row {}: {e}", i + 1)))?;
        let w: f64 = rec
            .get(col)
            .and_then(|s| s.parse().ok())
            .filter(|w: &f64| *w > 0.0 && w.is_finite())
            .ok_or_else(|| {
                CliError::input(
                    path,
                    format!("row {}: weight must be a positive number", i + 1),
                )
            })?;
        out.push(w);
    }
    if out.len() != n {
        return Err(CliError::input(
            path,
            format!("{} weights for {n} points", out.len()),
        ));
    }
    Ok(out)
}
