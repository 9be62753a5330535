//! JSON model documents. The metric is never stored; it is rebuilt from `A`.

use std::fs;
use std::path::Path;

use adaam_core::adaam::{AdaamModel, Method, ResolvedConfig};
use adaam_core::graph::{DiagonalPolicy, KernelForm};
use adaam_core::DenseMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

pub const MODEL_FORMAT_VERSION: u64 = 1;

fn default_method() -> String {
    "adaam".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: u64,
    #[serde(default = "default_method")]
    pub method: String,
    pub n: usize,
    pub d: usize,
    pub c: usize,
    pub k: usize,
    pub m: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub bandwidth: f64,
    pub iterations: usize,
    #[serde(default)]
    pub squared_kernel: bool,
    #[serde(default)]
    pub exclude_diagonal: bool,
    pub column_means: Vec<f64>,
    /// Projection, `d × m`, row-major.
    #[serde(rename = "A")]
    pub a: Vec<f64>,
}

pub fn method_name(m: Method) -> &'static str {
    match m {
        Method::Adaam => "adaam",
        Method::KnnLpp => "knn-lpp",
    }
}

impl From<&AdaamModel> for ModelDocument {
    fn from(model: &AdaamModel) -> Self {
        let cfg = &model.config;
        ModelDocument {
            format_version: MODEL_FORMAT_VERSION,
            method: method_name(cfg.method).into(),
            n: model.n,
            d: model.input_dim(),
            c: cfg.clusters,
            k: cfg.neighbors,
            m: cfg.dim,
            alpha1: cfg.alpha1,
            alpha2: cfg.alpha2,
            bandwidth: cfg.bandwidth,
            iterations: cfg.iterations,
            squared_kernel: cfg.kernel == KernelForm::SquaredDistance,
            exclude_diagonal: cfg.diagonal == DiagonalPolicy::Excluded,
            column_means: model.column_means.clone(),
            a: model.projection.matrix.as_slice().to_vec(),
        }
    }
}

impl ModelDocument {
    pub fn into_model(self) -> Result<AdaamModel> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(AppError::FormatVersion(self.format_version));
        }
        let method = match self.method.as_str() {
            "adaam" => Method::Adaam,
            "knn-lpp" => Method::KnnLpp,
            other => return Err(AppError::InvalidParams(format!("unknown model method {other:?}"))),
        };
        if self.column_means.len() != self.d {
            return Err(AppError::InvalidParams(format!(
                "column_means has {} values, expected d = {}",
                self.column_means.len(),
                self.d
            )));
        }
        let a = DenseMatrix::from_vec(self.d, self.m, self.a)?;
        let config = ResolvedConfig {
            method,
            clusters: self.c,
            neighbors: self.k,
            dim: self.m,
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            bandwidth: self.bandwidth,
            kernel: if self.squared_kernel { KernelForm::SquaredDistance } else { KernelForm::Distance },
            iterations: self.iterations,
            diagonal: if self.exclude_diagonal { DiagonalPolicy::Excluded } else { DiagonalPolicy::Eligible },
        };
        Ok(AdaamModel::from_parts(config, self.n, self.column_means, a)?)
    }
}

pub fn model_to_json(model: &AdaamModel) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&ModelDocument::from(model))?;
    s.push('\n');
    Ok(s)
}

pub fn model_from_json(text: &str) -> Result<AdaamModel> {
    serde_json::from_str::<ModelDocument>(text)?.into_model()
}

pub fn save_model(model: &AdaamModel, path: &Path) -> Result<()> {
    fs::write(path, model_to_json(model)?).map_err(|e| AppError::io(path, e))
}

pub fn load_model(path: &Path) -> Result<AdaamModel> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    model_from_json(&text)
}
