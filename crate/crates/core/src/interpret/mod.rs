//! Cluster interpretation through a chat-style LLM endpoint.

mod client;
mod prompt;
mod sections;

pub use client::*;
pub use prompt::*;
pub use sections::*;

use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

pub const TEMPERATURE_SWEEP: [f64; 4] = [0.1, 0.3, 0.5, 0.7];

#[derive(Debug, Error, PartialEq)]
pub enum InterpretError {
    #[error("no valid reports among {attempted} attempted")]
    NoValidReports { attempted: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityMetrics {
    pub temperature: f64,
    pub completeness_rate: f64,
    /// Longest over shortest valid report, in characters.
    pub length_variance_ratio: f64,
    pub mean_length: f64,
    pub valid: usize,
    pub attempted: usize,
}

/// Metrics from valid report lengths and the number attempted.
pub fn quality_from_lengths(lengths: &[usize], attempted: usize, temperature: f64) -> Result<QualityMetrics, InterpretError> {
    if lengths.is_empty() {
        return Err(InterpretError::NoValidReports { attempted });
    }
    let max = *lengths.iter().max().unwrap() as f64;
    let min = *lengths.iter().min().unwrap() as f64;
    Ok(QualityMetrics {
        temperature,
        completeness_rate: lengths.len() as f64 / attempted.max(lengths.len()) as f64,
        length_variance_ratio: if min > 0.0 { max / min } else { f64::INFINITY },
        mean_length: lengths.iter().sum::<usize>() as f64 / lengths.len() as f64,
        valid: lengths.len(),
        attempted: attempted.max(lengths.len()),
    })
}

pub fn quality_metrics(reports: &[InterpretationReport], temperature: f64) -> Result<QualityMetrics, InterpretError> {
    let lengths: Vec<usize> = reports.iter().filter(|r| r.is_valid()).map(|r| r.char_count).collect();
    quality_from_lengths(&lengths, reports.len(), temperature)
}

/// `quality_metrics.csv`, one row per temperature.
pub fn write_quality_csv(rows: &[QualityMetrics], path: &Path) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["temperature", "completeness_rate", "length_variance_ratio", "mean_length", "valid", "attempted"])?;
    for q in rows {
        w.write_record([
            q.temperature.to_string(),
            format!("{:.4}", q.completeness_rate),
            format!("{:.4}", q.length_variance_ratio),
            format!("{:.1}", q.mean_length),
            q.valid.to_string(),
            q.attempted.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
