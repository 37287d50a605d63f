//! Convergence traces as CSV plus a JSON sidecar holding the config echo.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{approximate_errors, Algo};
use crate::error::{Error, Result};
use crate::record::{Checkpoint, RunRecord};

pub const CSV_HEADER: [&str; 5] = ["iter", "epochs", "elapsed_s", "objective", "metric"];
pub const TRACE_SCHEMA: &str = "logbarrier-trace/1";

#[derive(Serialize, Deserialize)]
struct Sidecar {
    schema: String,
    metric_name: Option<String>,
    config: serde_json::Value,
}

fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Format(format!("{}: {other:?}", path.display())),
    }
}

fn float(v: f64) -> String {
    format!("{v:?}")
}

/// Writes `record` to `path` and its sidecar next to it (same stem, `.json`).
pub fn write_csv(record: &RunRecord, path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    w.write_record(CSV_HEADER).map_err(|e| csv_err(path, e))?;
    for c in &record.checkpoints {
        let metric = c.metric.map(float).unwrap_or_default();
        w.write_record([
            c.iter.to_string(),
            float(c.epochs),
            float(c.elapsed_s),
            float(c.objective),
            metric,
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    let body = Sidecar {
        schema: TRACE_SCHEMA.to_string(),
        metric_name: record.metric_name.clone(),
        config: record.config.clone(),
    };
    let text = serde_json::to_string_pretty(&body).expect("sidecar serializes");
    std::fs::write(&side, text + "\n").map_err(|e| Error::io(&side, e))
}

pub const COMPARE_HEADER: [&str; 8] = [
    "algo",
    "seed",
    "iter",
    "epochs",
    "elapsed_s",
    "objective",
    "metric",
    "approx_error",
];

/// One file for a whole comparison: every checkpoint of every cell plus
/// `f(x_t) − f_best` against the best objective across all cells.
pub fn write_compare_csv(cells: &[(Algo, u64, &RunRecord)], path: &Path) -> Result<()> {
    let records: Vec<RunRecord> = cells.iter().map(|(_, _, r)| (*r).clone()).collect();
    let errors = approximate_errors(&records);
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    w.write_record(COMPARE_HEADER).map_err(|e| csv_err(path, e))?;
    for ((algo, seed, record), errs) in cells.iter().zip(&errors) {
        for (c, e) in record.checkpoints.iter().zip(errs) {
            w.write_record([
                algo.to_string(),
                seed.to_string(),
                c.iter.to_string(),
                float(c.epochs),
                float(c.elapsed_s),
                float(c.objective),
                c.metric.map(float).unwrap_or_default(),
                float(*e),
            ])
            .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a trace written by [`write_csv`]; the sidecar is optional.
pub fn read_csv(path: &Path) -> Result<RunRecord> {
    let mut r = csv::ReaderBuilder::new()
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Format(format!(
            "{}: unexpected header {header:?}",
            path.display()
        )));
    }
    let bad = |line: u64, what: &str| Error::Format(format!("{}:{line}: bad {what}", path.display()));
    let mut checkpoints = Vec::new();
    for row in r.records() {
        let row = row.map_err(|e| csv_err(path, e))?;
        let line = row.position().map_or(0, |p| p.line());
        let num = |i: usize| row[i].parse::<f64>().map_err(|_| bad(line, CSV_HEADER[i]));
        checkpoints.push(Checkpoint {
            iter: row[0].parse().map_err(|_| bad(line, "iter"))?,
            epochs: num(1)?,
            elapsed_s: num(2)?,
            objective: num(3)?,
            metric: if row[4].is_empty() { None } else { Some(num(4)?) },
        });
    }
    let mut record = RunRecord {
        checkpoints,
        ..RunRecord::default()
    };
    let side = sidecar_path(path);
    if side.exists() {
        let text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
        let s: Sidecar = serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", side.display())))?;
        if s.schema != TRACE_SCHEMA {
            return Err(Error::Format(format!(
                "{}: unknown schema {:?}",
                side.display(),
                s.schema
            )));
        }
        record.metric_name = s.metric_name;
        record.config = s.config;
    }
    Ok(record)
}
