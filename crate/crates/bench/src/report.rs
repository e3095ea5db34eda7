//! JSON and CSV persistence.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{BenchError, Result};
use crate::eval::EvalReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(BenchError::Usage(format!("unknown report format {other:?} (expected json or csv)"))),
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| BenchError::file(path, e))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let mut w = create(path.as_ref())?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| BenchError::file(path, e))?;
    Ok(serde_json::from_slice(&bytes)?)
}

/// Summary block (`key,value` lines), a blank line, then one row per sample.
pub fn report_to_csv(report: &EvalReport, out: impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    let opt = |v: Option<f64>| v.map_or_else(String::new, |v| v.to_string());
    let echo = serde_json::to_string(&report.config_echo)?;
    let summary = [
        ("fooling_rate", report.fooling_rate.to_string()),
        ("median_pert_pct", opt(report.median_pert_pct)),
        ("median_pert_pct_elements", opt(report.median_pert_pct_elements)),
        ("mean_outer_iterations", report.mean_outer_iterations.to_string()),
        ("mean_time_per_sample", report.mean_time_per_sample.to_string()),
        ("samples", report.per_sample.len().to_string()),
        ("config_echo", echo),
    ];
    for (k, v) in summary {
        w.write_record([k, v.as_str()])?;
    }
    w.write_record([""])?;
    w.write_record([
        "index",
        "true_label",
        "original_label",
        "adversarial_label",
        "fooled",
        "outer_iterations",
        "perturbed_pixels",
        "total_pixels",
        "perturbed_elements",
        "total_elements",
        "perturbed_per_channel",
        "pert_pct",
        "l1",
        "failure",
        "time_s",
    ])?;
    for s in &report.per_sample {
        let per_channel = s.perturbed_per_channel.iter().map(ToString::to_string).collect::<Vec<_>>().join(";");
        w.write_record([
            s.index.to_string(),
            s.true_label.to_string(),
            s.original_label.to_string(),
            s.adversarial_label.to_string(),
            s.fooled.to_string(),
            s.outer_iterations.to_string(),
            s.perturbed_pixels.to_string(),
            s.total_pixels.to_string(),
            s.perturbed_elements.to_string(),
            s.total_elements.to_string(),
            per_channel,
            s.pert_pct.to_string(),
            s.l1.to_string(),
            s.failure.clone().unwrap_or_default(),
            s.time_s.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_report(report: &EvalReport, path: impl AsRef<Path>, format: Format) -> Result<()> {
    match format {
        Format::Json => write_json(report, path),
        Format::Csv => report_to_csv(report, create(path.as_ref())?),
    }
}

pub fn read_report(path: impl AsRef<Path>) -> Result<EvalReport> {
    read_json(path)
}

/// Plain table of serializable rows with a header line.
pub fn rows_to_csv<T: Serialize>(rows: &[T], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_rows<T: Serialize>(rows: &[T], path: impl AsRef<Path>, format: Format) -> Result<()> {
    match format {
        Format::Json => write_json(&rows, path),
        Format::Csv => rows_to_csv(rows, create(path.as_ref())?),
    }
}
