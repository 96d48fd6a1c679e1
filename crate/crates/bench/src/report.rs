//! CSV and JSON artifacts.
//!
//! CSV: one row per trial with the columns
//! `method,function,dim,trial,seed,grad_norm,iterations,time_ms,success`
//! (`success` is literally `true` or `false`), plus a companion
//! `<stem>.summary.csv` with one aggregate row per (function, method).
//! JSON: a single document holding `schema_version`, the report and every
//! trial record.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::Format;
use crate::error::{BenchError, Result};
use crate::suite::{BenchReport, SummaryRow, TrialRecord};

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 9] =
    ["method", "function", "dim", "trial", "seed", "grad_norm", "iterations", "time_ms", "success"];

/// The CSV view of a trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub method: String,
    pub function: String,
    pub dim: usize,
    pub trial: usize,
    pub seed: u64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub time_ms: f64,
    pub success: bool,
}

impl From<&TrialRecord> for CsvRow {
    fn from(r: &TrialRecord) -> Self {
        Self {
            method: r.method.clone(),
            function: r.function.clone(),
            dim: r.dim,
            trial: r.trial,
            seed: r.seed,
            grad_norm: r.grad_norm,
            iterations: r.iterations,
            time_ms: r.time_ms,
            success: r.success,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct JsonDocument {
    pub schema_version: u32,
    pub report: BenchReport,
    pub records: Vec<TrialRecord>,
}

/// `results.csv` → `results.summary.csv`.
pub fn summary_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.summary.csv"))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> BenchError + '_ {
    move |source| BenchError::Csv { path: path.to_path_buf(), source }
}

pub fn trials_csv(records: &[TrialRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if records.is_empty() {
        w.write_record(CSV_HEADER).map_err(csv_err(Path::new("<trials>")))?;
    }
    for r in records {
        w.serialize(CsvRow::from(r)).map_err(csv_err(Path::new("<trials>")))?;
    }
    w.into_inner().map_err(|e| BenchError::Io { path: "<trials>".into(), source: e.into_error() })
}

pub fn summary_csv(report: &BenchReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &report.summary {
        w.serialize(row).map_err(csv_err(Path::new("<summary>")))?;
    }
    if report.summary.is_empty() {
        w.write_record([
            "method",
            "function",
            "dim",
            "trials",
            "successes",
            "success_rate",
            "mean_grad_norm",
            "mean_time_ms",
            "tol",
            "max_iters",
            "radius",
            "level",
            "horizon",
            "alpha",
            "beta",
        ])
        .map_err(csv_err(Path::new("<summary>")))?;
    }
    w.into_inner().map_err(|e| BenchError::Io { path: "<summary>".into(), source: e.into_error() })
}

pub fn json_document(report: &BenchReport, records: &[TrialRecord]) -> Result<Vec<u8>> {
    let doc = JsonDocument { schema_version: SCHEMA_VERSION, report: report.clone(), records: records.to_vec() };
    let mut bytes =
        serde_json::to_vec_pretty(&doc).map_err(|source| BenchError::Json { path: "<report>".into(), source })?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes `bytes` to `path`, removing whatever was written if it fails.
fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let result = fs::File::create(path).and_then(|mut f| {
        f.write_all(bytes)?;
        f.sync_all()
    });
    result.map_err(|source| {
        let _ = fs::remove_file(path);
        BenchError::Io { path: path.to_path_buf(), source }
    })
}

/// Writes the report to `path` (and the summary companion for CSV).
/// Returns the paths written.
pub fn write_report(
    report: &BenchReport,
    records: &[TrialRecord],
    format: Format,
    path: &Path,
) -> Result<Vec<PathBuf>> {
    match format {
        Format::Csv => {
            let trials = trials_csv(records)?;
            let summary = summary_csv(report)?;
            let companion = summary_path(path);
            write_file(path, &trials)?;
            if let Err(e) = write_file(&companion, &summary) {
                let _ = fs::remove_file(path);
                return Err(e);
            }
            Ok(vec![path.to_path_buf(), companion])
        }
        Format::Json => {
            write_file(path, &json_document(report, records)?)?;
            Ok(vec![path.to_path_buf()])
        }
    }
}

pub fn read_trials_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_err(path))
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_err(path))
}

pub fn read_json(path: &Path) -> Result<JsonDocument> {
    let text = fs::read(path).map_err(|source| BenchError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_slice(&text).map_err(|source| BenchError::Json { path: path.to_path_buf(), source })
}

/// Fixed-width table of the summary for terminals.
pub fn summary_table(report: &BenchReport) -> String {
    let mut out = format!(
        "{:<26} {:<6} {:>4} {:>7} {:>9} {:>14} {:>12}\n",
        "function", "method", "dim", "trials", "success", "mean |grad|", "mean ms"
    );
    let opt = |v: Option<f64>, prec: usize, sci: bool| match v {
        Some(v) if sci => format!("{v:.prec$e}"),
        Some(v) => format!("{v:.prec$}"),
        None => "-".into(),
    };
    for row in &report.summary {
        out.push_str(&format!(
            "{:<26} {:<6} {:>4} {:>7} {:>9.2} {:>14} {:>12}\n",
            row.function,
            row.method,
            row.dim,
            row.trials,
            row.success_rate,
            opt(row.mean_grad_norm, 4, true),
            opt(row.mean_time_ms, 3, false),
        ));
    }
    out
}
