//! Per-(method, SNR, N_s) averages across trials.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::config::Method;
use crate::error::{ExperimentError, Result};
use crate::sweep::{format_sig9, MetricRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: Method,
    pub snr_db: f64,
    pub n_s: usize,
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation over `√count`; 0 for a single record.
    pub stderr: f64,
}

pub const SUMMARY_HEADER: [&str; 6] = ["method", "snr_db", "n_s", "count", "mean", "stderr"];

/// Mean and standard error of a sample. Errors on an empty slice.
pub fn mean_stderr(xs: &[f64]) -> Result<(f64, f64)> {
    if xs.is_empty() {
        return Err(ExperimentError::Config("cannot summarize an empty sample".into()));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return Ok((mean, 0.0));
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// Groups `records` by (method, SNR, N_s), in that sort order.
pub fn summarize(records: &[MetricRecord]) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(ExperimentError::Config("no records to summarize".into()));
    }
    let mut sorted: Vec<&MetricRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.method.cmp(&b.method).then(a.snr_db.total_cmp(&b.snr_db)).then(a.n_s.cmp(&b.n_s)));
    let mut rows = Vec::new();
    for group in sorted.chunk_by(|a, b| a.method == b.method && a.snr_db == b.snr_db && a.n_s == b.n_s) {
        let values: Vec<f64> = group.iter().map(|r| r.spectral_efficiency).collect();
        let (mean, stderr) = mean_stderr(&values)?;
        rows.push(SummaryRow {
            method: group[0].method,
            snr_db: group[0].snr_db,
            n_s: group[0].n_s,
            count: values.len(),
            mean,
            stderr,
        });
    }
    Ok(rows)
}

/// Look up one row of a summary.
pub fn find(summary: &[SummaryRow], method: Method, snr_db: f64, n_s: usize) -> Option<&SummaryRow> {
    summary.iter().find(|r| r.method == method && r.snr_db == snr_db && r.n_s == n_s)
}

pub fn write_summary_csv<W: Write>(w: W, rows: &[SummaryRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SUMMARY_HEADER)?;
    for r in rows {
        out.write_record([
            r.method.name().to_string(),
            format_sig9(r.snr_db),
            r.n_s.to_string(),
            r.count.to_string(),
            format_sig9(r.mean),
            format_sig9(r.stderr),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_summary_csv<R: Read>(r: R) -> Result<Vec<SummaryRow>> {
    let mut reader = csv::Reader::from_reader(r);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != SUMMARY_HEADER {
        return Err(ExperimentError::Config(format!("unexpected summary header {header:?}")));
    }
    reader.deserialize().map(|row| row.map_err(ExperimentError::from)).collect()
}
