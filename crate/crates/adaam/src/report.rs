//! Run configuration echo and clustering reports.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

pub const REPORT_FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    /// Adaptive affinity matrix followed by LPP.
    Adaam,
    /// LPP on the plain k-NN heat kernel.
    KnnLpp,
    /// k-means on the centered input, no projection.
    Raw,
}

impl MethodName {
    pub fn as_str(self) -> &'static str {
        match self {
            MethodName::Adaam => "adaam",
            MethodName::KnnLpp => "knn-lpp",
            MethodName::Raw => "raw",
        }
    }
}

/// Every knob that influences a report, fully resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub method: MethodName,
    pub clusters: usize,
    pub k: Option<usize>,
    pub dim: Option<usize>,
    pub alpha1: f64,
    pub alpha2: f64,
    pub bandwidth: Option<f64>,
    pub squared_kernel: bool,
    pub exclude_diagonal: bool,
    pub iterations: usize,
    pub rounds: usize,
    pub seed: u64,
    pub standardize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub format_version: u64,
    pub method: MethodName,
    pub dataset: String,
    pub n: usize,
    pub d: usize,
    pub c: usize,
    pub k: Option<usize>,
    pub rounds: usize,
    pub accuracies: Vec<f64>,
    pub avg: Option<f64>,
    pub max: Option<f64>,
    /// Minimum within-cluster sum of each round.
    pub wcss: Vec<f64>,
    pub wall_ms: f64,
    pub fit_ms: f64,
    pub seed: u64,
    /// Space k-means ran in: projected coordinates as produced, without rescaling.
    pub kmeans_space: String,
    pub warnings: Vec<String>,
    pub config: RunConfig,
}

impl ClusterReport {
    /// Newline-terminated JSON.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn table_header() -> String {
        format!(
            "{:<24} {:<8} {:>4} {:>4} {:>7} {:>9} {:>9} {:>10}",
            "dataset", "method", "k", "m", "rounds", "avg(%)", "max(%)", "wall_ms"
        )
    }

    pub fn table_row(&self) -> String {
        let pct = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |a| format!("{:.2}", 100.0 * a));
        format!(
            "{:<24} {:<8} {:>4} {:>4} {:>7} {:>9} {:>9} {:>10.1}",
            self.dataset,
            self.method.as_str(),
            self.k.map_or_else(|| "-".to_string(), |k| k.to_string()),
            self.config.dim.map_or_else(|| "-".to_string(), |m| m.to_string()),
            self.rounds,
            pct(self.avg),
            pct(self.max),
            self.wall_ms
        )
    }
}

pub fn write_reports(reports: &[ClusterReport], path: &Path) -> Result<()> {
    let text = if reports.len() == 1 {
        reports[0].to_json()?
    } else {
        let mut s = serde_json::to_string_pretty(reports)?;
        s.push('\n');
        s
    };
    fs::write(path, text).map_err(|e| AppError::io(path, e))
}
