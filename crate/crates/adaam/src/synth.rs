//! Seeded Gaussian blob generator used as a stand-in for labelled image sets.

use adaam_core::DenseMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::LabeledDataset;
use crate::error::{AppError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlobParams {
    pub clusters: usize,
    pub samples: usize,
    pub features: usize,
    /// Minimum distance between centers, in units of `sigma`.
    pub separation: f64,
    pub sigma: f64,
    pub seed: u64,
}

fn min_pairwise_distance(centers: &DenseMatrix) -> f64 {
    let c = centers.rows();
    let mut best = f64::INFINITY;
    for a in 0..c {
        for b in (a + 1)..c {
            let d2: f64 = centers.row(a).iter().zip(centers.row(b)).map(|(x, y)| (x - y) * (x - y)).sum();
            best = best.min(d2.sqrt());
        }
    }
    best
}

/// `clusters` isotropic Gaussian clusters. Centers are random and rescaled so
/// the closest pair sits exactly `separation · sigma` apart; cluster sizes
/// differ by at most one and samples are grouped by cluster.
pub fn synth_blobs(p: &BlobParams) -> Result<LabeledDataset> {
    synth_blobs_with_centers(p).map(|(ds, _)| ds)
}

/// [`synth_blobs`] that also returns the cluster centers, one per row.
pub fn synth_blobs_with_centers(p: &BlobParams) -> Result<(LabeledDataset, DenseMatrix)> {
    if p.clusters == 0 || p.samples < p.clusters || p.features == 0 {
        return Err(AppError::InvalidParams(
            "need 1 <= clusters <= samples and at least one feature".into(),
        ));
    }
    if !(p.sigma > 0.0 && p.sigma.is_finite() && p.separation > 0.0 && p.separation.is_finite()) {
        return Err(AppError::InvalidParams("sigma and separation must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };

    let mut centers = DenseMatrix::from_fn(p.clusters, p.features, |_, _| normal());
    if p.clusters > 1 {
        let min = min_pairwise_distance(&centers);
        if min.is_nan() || min <= 0.0 {
            return Err(AppError::InvalidParams("degenerate random centers".into()));
        }
        centers.scale(p.separation * p.sigma / min);
    }

    let base = p.samples / p.clusters;
    let extra = p.samples % p.clusters;
    let mut data = Vec::with_capacity(p.samples * p.features);
    let mut labels = Vec::with_capacity(p.samples);
    for k in 0..p.clusters {
        let size = base + usize::from(k < extra);
        for _ in 0..size {
            data.extend(centers.row(k).iter().map(|&c| c + p.sigma * normal()));
            labels.push(k);
        }
    }
    let ds = LabeledDataset {
        x: DenseMatrix::from_vec(p.samples, p.features, data)?,
        labels: Some(labels),
        name: format!("blobs-c{}-n{}-d{}-s{}", p.clusters, p.samples, p.features, p.seed),
    };
    Ok((ds, centers))
}
