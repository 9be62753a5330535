//! Glue between datasets, the fitting pipeline and the evaluation protocol.

use std::time::Instant;

use adaam_core::adaam::{adaam_fit, center, knn_lpp_fit, AdaamConfig, AdaamModel};
use adaam_core::eval::{evaluate_round, round_seed, KmeansOptions, RoundsSummary};
use adaam_core::graph::{Bandwidth, DiagonalPolicy, KernelForm};
use adaam_core::DenseMatrix;
use rayon::prelude::*;

use crate::dataset::LabeledDataset;
use crate::error::{AppError, Result};
use crate::report::{ClusterReport, MethodName, RunConfig, REPORT_FORMAT_VERSION};

/// Fit knobs shared by the `fit`, `cluster` and `bench` subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub k: Option<usize>,
    pub dim: Option<usize>,
    pub alpha1: f64,
    pub alpha2: f64,
    pub bandwidth: Option<f64>,
    pub squared_kernel: bool,
    pub iterations: usize,
    pub exclude_diagonal: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            k: None,
            dim: None,
            alpha1: 2.5,
            alpha2: 5.0,
            bandwidth: None,
            squared_kernel: false,
            iterations: 1,
            exclude_diagonal: false,
        }
    }
}

impl FitOptions {
    pub fn core_config(&self, clusters: usize) -> AdaamConfig {
        let mut cfg = AdaamConfig::new(clusters);
        cfg.neighbors = self.k;
        cfg.dim = self.dim;
        cfg.alpha1 = self.alpha1;
        cfg.alpha2 = self.alpha2;
        cfg.bandwidth = self.bandwidth.map_or(Bandwidth::Auto, Bandwidth::Fixed);
        cfg.kernel = if self.squared_kernel { KernelForm::SquaredDistance } else { KernelForm::Distance };
        cfg.iterations = self.iterations;
        cfg.diagonal = if self.exclude_diagonal { DiagonalPolicy::Excluded } else { DiagonalPolicy::Eligible };
        cfg
    }
}

/// Fits the learned projection for `method`; `Raw` has none.
pub fn fit_method(
    method: MethodName,
    x: &DenseMatrix,
    clusters: usize,
    opts: &FitOptions,
) -> Result<Option<AdaamModel>> {
    let cfg = opts.core_config(clusters);
    Ok(match method {
        MethodName::Adaam => Some(adaam_fit(x, &cfg)?),
        MethodName::KnnLpp => Some(knn_lpp_fit(x, &cfg)?),
        MethodName::Raw => None,
    })
}

/// Coordinates k-means runs on: the projection of the training data, or the
/// centered input for `Raw`.
pub fn embed(x: &DenseMatrix, model: Option<&AdaamModel>) -> Result<DenseMatrix> {
    Ok(match model {
        Some(m) => m.transform(x)?,
        None => center(x)?.into_parts().0,
    })
}

/// Rounds run in parallel; each round's seed depends only on its index, so the
/// summary is identical to the serial one for any thread count.
pub fn evaluate_parallel(
    y: &DenseMatrix,
    truth: Option<&[usize]>,
    clusters: usize,
    rounds: usize,
    seed: u64,
) -> Result<RoundsSummary> {
    if rounds == 0 {
        return Err(AppError::InvalidParams("rounds must be at least 1".into()));
    }
    let opts = KmeansOptions::default();
    let outcomes = (0..rounds)
        .into_par_iter()
        .map(|r| evaluate_round(y, truth, clusters, round_seed(seed, r), opts))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(RoundsSummary::from_rounds(outcomes))
}

/// Cluster count from an explicit value or the number of label classes.
pub fn resolve_clusters(ds: &LabeledDataset, explicit: Option<usize>) -> Result<usize> {
    explicit
        .or_else(|| ds.class_count())
        .ok_or_else(|| AppError::Usage("--clusters is required when the dataset has no labels".into()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterRequest {
    pub method: MethodName,
    pub clusters: Option<usize>,
    pub fit: FitOptions,
    pub rounds: usize,
    pub seed: u64,
    pub standardize: bool,
}

/// Fits (unless `Raw`), embeds and evaluates one dataset.
pub fn run_cluster(ds: &LabeledDataset, req: &ClusterRequest) -> Result<ClusterReport> {
    let start = Instant::now();
    let mut ds = ds.clone();
    if req.standardize {
        ds.standardize();
    }
    let c = resolve_clusters(&ds, req.clusters)?;
    let model = fit_method(req.method, &ds.x, c, &req.fit)?;
    let fit_ms = start.elapsed().as_secs_f64() * 1e3;
    let y = embed(&ds.x, model.as_ref())?;
    let summary = evaluate_parallel(&y, ds.labels.as_deref(), c, req.rounds, req.seed)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;

    let resolved = model.as_ref().map(|m| &m.config);
    let config = RunConfig {
        method: req.method,
        clusters: c,
        k: resolved.map(|r| r.neighbors),
        dim: resolved.map(|r| r.dim),
        alpha1: req.fit.alpha1,
        alpha2: req.fit.alpha2,
        bandwidth: resolved.map(|r| r.bandwidth),
        squared_kernel: req.fit.squared_kernel,
        exclude_diagonal: req.fit.exclude_diagonal,
        iterations: req.fit.iterations,
        rounds: req.rounds,
        seed: req.seed,
        standardize: req.standardize,
    };
    Ok(ClusterReport {
        format_version: REPORT_FORMAT_VERSION,
        method: req.method,
        dataset: ds.name.clone(),
        n: ds.n(),
        d: ds.d(),
        c,
        k: config.k,
        rounds: req.rounds,
        accuracies: summary.accuracies.clone(),
        avg: summary.average,
        max: summary.max,
        wcss: summary.rounds.iter().map(|r| r.assignment.wcss).collect(),
        wall_ms,
        fit_ms,
        seed: req.seed,
        kmeans_space: if model.is_some() { "projected" } else { "centered" }.into(),
        warnings: model.map(|m| m.warnings.iter().map(ToString::to_string).collect()).unwrap_or_default(),
        config,
    })
}

/// Rebuilds the request that produced `config`; rerunning it reproduces the report.
pub fn request_from_config(config: &RunConfig) -> ClusterRequest {
    ClusterRequest {
        method: config.method,
        clusters: Some(config.clusters),
        fit: FitOptions {
            k: config.k,
            dim: config.dim,
            alpha1: config.alpha1,
            alpha2: config.alpha2,
            bandwidth: config.bandwidth,
            squared_kernel: config.squared_kernel,
            iterations: config.iterations,
            exclude_diagonal: config.exclude_diagonal,
        },
        rounds: config.rounds,
        seed: config.seed,
        standardize: config.standardize,
    }
}

/// Thread pool honoring `ADAAM_THREADS` when set to a positive integer.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("ADAAM_THREADS") {
        let threads: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| AppError::Usage(format!("ADAAM_THREADS must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(threads);
    }
    builder.build().map_err(|e| AppError::InvalidParams(e.to_string()))
}
