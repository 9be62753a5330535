//! The adaptive affinity pipeline: centering, the data-driven intermediate
//! affinity, the combined-Laplacian projection, the projection-driven final
//! affinity, and LPP on `Δ + D`.

use alloc::vec;
use alloc::vec::Vec;
use core::cell::OnceCell;
use core::ops::Deref;

use crate::error::{Error, Result, Warning};
use crate::graph::{
    degree, knn_heat_kernel, laplacian_quadratic, sparsify_factor, Bandwidth, DiagonalPolicy,
    KernelForm, SparseAffinity,
};
use crate::linalg::{row_space_basis, symmetric_eig, thin_svd};
use crate::lpp::{lift_columns, lpp_in_basis, metric_of, Projection};
use crate::matrix::DenseMatrix;

/// Column-centered instance matrix together with the means that were removed.
#[derive(Debug, Clone)]
pub struct DataMatrix {
    data: DenseMatrix,
    means: Vec<f64>,
    row_space: OnceCell<Option<DenseMatrix>>,
}

impl PartialEq for DataMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.data == other.data && self.means == other.means
    }
}

impl Deref for DataMatrix {
    type Target = DenseMatrix;

    fn deref(&self) -> &DenseMatrix {
        &self.data
    }
}

impl DataMatrix {
    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.data
    }

    pub fn into_parts(self) -> (DenseMatrix, Vec<f64>) {
        (self.data, self.means)
    }

    /// Orthonormal row-space basis, cached; `None` for full column rank.
    pub fn row_space(&self) -> Result<Option<&DenseMatrix>> {
        if self.row_space.get().is_none() {
            let basis = row_space_basis(&self.data)?;
            let _ = self.row_space.set(basis);
        }
        Ok(self.row_space.get().and_then(Option::as_ref))
    }
}

/// Subtracts column means. Needs at least two rows.
pub fn center(x: &DenseMatrix) -> Result<DataMatrix> {
    let (n, d) = x.shape();
    if n < 2 {
        return Err(Error::TooFewRows { n, min: 2 });
    }
    if !x.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut means = vec![0.0; d];
    for i in 0..n {
        means.iter_mut().zip(x.row(i)).for_each(|(m, v)| *m += v);
    }
    means.iter_mut().for_each(|m| *m /= n as f64);
    let mut data = x.clone();
    for i in 0..n {
        data.row_mut(i).iter_mut().zip(&means).for_each(|(v, m)| *v -= m);
    }
    Ok(DataMatrix { data, means, row_space: OnceCell::new() })
}

/// Requested rank of a low-rank affinity factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RankSpec {
    #[default]
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorSource {
    FromData,
    FromProjection,
}

/// Column-orthonormal `n × t` factor `P`; the affinity is `P Pᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoFactor {
    pub p: DenseMatrix,
    pub source: FactorSource,
}

/// One affinity estimate: its factor and the sparsified `P Pᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityStage {
    pub factor: OrthoFactor,
    pub affinity: SparseAffinity,
    pub budget: usize,
    pub kept: usize,
    pub warnings: Vec<Warning>,
}

fn factor_stage(
    y: &DenseMatrix,
    c: usize,
    rank: RankSpec,
    auto_cap: usize,
    alpha: f64,
    policy: DiagonalPolicy,
    source: FactorSource,
) -> Result<AffinityStage> {
    let full = y.rows().min(y.cols());
    if let RankSpec::Fixed(t) = rank {
        if t > full {
            return Err(Error::RankRequestTooLarge { requested: t, max: full });
        }
    }
    let svd = thin_svd(y, full)?;
    let numerical = svd.numerical_rank();
    let mut warnings = Vec::new();
    let t = match rank {
        RankSpec::Auto => auto_cap.min(numerical),
        RankSpec::Fixed(t) if t > numerical => {
            warnings.push(Warning::RankDeficient { requested: t, numerical });
            numerical
        }
        RankSpec::Fixed(t) => t,
    };
    let keep: Vec<usize> = (0..t).collect();
    let p = svd.left.select_columns(&keep);
    let sparse = sparsify_factor(&p, c, alpha, policy)?;
    warnings.extend(sparse.warning);
    Ok(AffinityStage {
        factor: OrthoFactor { p, source },
        affinity: sparse.affinity,
        budget: sparse.budget,
        kept: sparse.kept,
        warnings,
    })
}

/// `P` = leading left singular vectors of the centered data (maximizing
/// `tr(Pᵀ X Xᵀ P)`), then `P Pᵀ` sparsified with `alpha1`. `Auto` rank is
/// `min(c, rank(X))`.
pub fn intermediate_affinity(
    x: &DataMatrix,
    c: usize,
    rank: RankSpec,
    alpha1: f64,
    policy: DiagonalPolicy,
) -> Result<AffinityStage> {
    factor_stage(x, c, rank, c, alpha1, policy, FactorSource::FromData)
}

/// Same construction on the projected data `X A`; `Auto` rank is
/// `min(m, rank(XA))`.
pub fn final_affinity(
    x: &DataMatrix,
    a: &Projection,
    c: usize,
    rank: RankSpec,
    alpha2: f64,
    policy: DiagonalPolicy,
) -> Result<AffinityStage> {
    if a.input_dim() != x.cols() {
        return Err(Error::ShapeMismatch {
            context: "final_affinity projection",
            expected: (x.cols(), a.output_dim()),
            found: a.matrix.shape(),
        });
    }
    let xa = x.matmul(&a.matrix)?;
    factor_stage(&xa, c, rank, a.output_dim(), alpha2, policy, FactorSource::FromProjection)
}

/// The `m` unit-norm eigenvectors of `Xᵀ (L − Δ) X` with smallest eigenvalues,
/// where `L` is the Laplacian of `w`. The intermediate graph enters as `−Δ`
/// because its own degree matrix vanishes.
pub fn projection_step(
    x: &DataMatrix,
    w: &SparseAffinity,
    delta: &SparseAffinity,
    m: usize,
) -> Result<Projection> {
    let (n, d) = x.shape();
    if m > d {
        return Err(Error::RankRequestTooLarge { requested: m, max: d });
    }
    for g in [w, delta] {
        if g.n() != n {
            return Err(Error::ShapeMismatch {
                context: "projection_step affinity",
                expected: (n, n),
                found: (g.n(), g.n()),
            });
        }
    }
    let basis = x.row_space()?.filter(|v| v.cols() >= m);
    let reduced;
    let y: &DenseMatrix = match basis {
        Some(v) => {
            reduced = x.matmul(v)?;
            &reduced
        }
        None => x,
    };
    let q = laplacian_quadratic(w, y)?.sub(&delta.quadratic_form(y)?)?;
    let eig = symmetric_eig(&q)?;
    let keep: Vec<usize> = (0..m).collect();
    let matrix = lift_columns(basis, &eig.vectors.select_columns(&keep))?;
    Ok(Projection { matrix, eigenvalues: eig.values[..m].to_vec() })
}

/// `k = Round(log₂(n / c))`, rounding half away from zero, clamped to `[1, n − 1]`.
pub fn default_neighbors(n: usize, c: usize) -> usize {
    if n < 2 || c == 0 {
        return 1;
    }
    let k = libm::round(libm::log2(n as f64 / c as f64));
    (k.max(1.0) as usize).min(n - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Adaam,
    /// k-NN heat kernel fed directly to LPP.
    KnnLpp,
}

/// Fit options; `None` / `Auto` fields resolve from `(n, c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaamConfig {
    pub clusters: usize,
    pub neighbors: Option<usize>,
    pub dim: Option<usize>,
    pub alpha1: f64,
    pub alpha2: f64,
    pub bandwidth: Bandwidth,
    pub kernel: KernelForm,
    pub iterations: usize,
    pub intermediate_rank: RankSpec,
    pub final_rank: RankSpec,
    pub diagonal: DiagonalPolicy,
}

impl AdaamConfig {
    pub fn new(clusters: usize) -> Self {
        Self {
            clusters,
            neighbors: None,
            dim: None,
            alpha1: 2.5,
            alpha2: 5.0,
            bandwidth: Bandwidth::Auto,
            kernel: KernelForm::Distance,
            iterations: 1,
            intermediate_rank: RankSpec::Auto,
            final_rank: RankSpec::Auto,
            diagonal: DiagonalPolicy::Eligible,
        }
    }
}

/// Fully resolved configuration echoed into every model.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub method: Method,
    pub clusters: usize,
    pub neighbors: usize,
    pub dim: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub bandwidth: f64,
    pub kernel: KernelForm,
    pub iterations: usize,
    pub diagonal: DiagonalPolicy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaamModel {
    pub config: ResolvedConfig,
    pub n: usize,
    pub column_means: Vec<f64>,
    pub projection: Projection,
    pub metric: DenseMatrix,
    pub warnings: Vec<Warning>,
}

impl AdaamModel {
    /// Rebuilds a model from stored parts; the metric is recomputed.
    pub fn from_parts(
        config: ResolvedConfig,
        n: usize,
        column_means: Vec<f64>,
        projection: DenseMatrix,
    ) -> Result<Self> {
        if column_means.len() != projection.rows() {
            return Err(Error::LengthMismatch { left: column_means.len(), right: projection.rows() });
        }
        if !projection.is_finite() || column_means.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let m = projection.cols();
        let projection = Projection { matrix: projection, eigenvalues: vec![0.0; m] };
        let metric = metric_of(&projection);
        Ok(Self { config, n, column_means, projection, metric, warnings: Vec::new() })
    }

    pub fn input_dim(&self) -> usize {
        self.column_means.len()
    }

    pub fn output_dim(&self) -> usize {
        self.projection.output_dim()
    }

    /// `(x_new − means) · A`.
    pub fn transform(&self, xnew: &DenseMatrix) -> Result<DenseMatrix> {
        let d = self.input_dim();
        if xnew.cols() != d {
            return Err(Error::ShapeMismatch {
                context: "transform input",
                expected: (xnew.rows(), d),
                found: xnew.shape(),
            });
        }
        let mut centered = xnew.clone();
        for i in 0..centered.rows() {
            centered.row_mut(i).iter_mut().zip(&self.column_means).for_each(|(v, m)| *v -= m);
        }
        centered.matmul(&self.projection.matrix)
    }
}

struct Prepared {
    x: DataMatrix,
    k: usize,
    m: usize,
}

fn prepare(raw: &DenseMatrix, cfg: &AdaamConfig) -> Result<Prepared> {
    let (n, d) = raw.shape();
    let c = cfg.clusters;
    if c > n {
        return Err(Error::ClusterCountTooLarge { c, n });
    }
    if c < 2 {
        return Err(Error::InvalidParameter("cluster count must be at least 2"));
    }
    if cfg.iterations == 0 {
        return Err(Error::InvalidParameter("iterations must be at least 1"));
    }
    let k = cfg.neighbors.unwrap_or_else(|| default_neighbors(n, c));
    if k == 0 || k >= n {
        return Err(Error::KTooLarge { k, n });
    }
    let m = cfg.dim.unwrap_or(c);
    if m == 0 || m > d {
        return Err(Error::RankRequestTooLarge { requested: m, max: d });
    }
    Ok(Prepared { x: center(raw)?, k, m })
}

/// Full pipeline: center, k-NN heat kernel, intermediate affinity, projection,
/// final affinity (repeated `iterations` times), then LPP on `Δ + D`.
pub fn adaam_fit(raw: &DenseMatrix, cfg: &AdaamConfig) -> Result<AdaamModel> {
    let Prepared { x, k, m } = prepare(raw, cfg)?;
    let c = cfg.clusters;
    let knn = knn_heat_kernel(&x, k, cfg.bandwidth, cfg.kernel)?;
    let w = &knn.affinity;
    let mut warnings = Vec::new();

    let stage = intermediate_affinity(&x, c, cfg.intermediate_rank, cfg.alpha1, cfg.diagonal)?;
    warnings.extend(stage.warnings);
    let mut delta = stage.affinity;
    for _ in 0..cfg.iterations {
        let a = projection_step(&x, w, &delta, m)?;
        let stage = final_affinity(&x, &a, c, cfg.final_rank, cfg.alpha2, cfg.diagonal)?;
        warnings.extend(stage.warnings);
        delta = stage.affinity;
    }

    let combined = delta.with_added_diagonal(degree(w).as_slice())?;
    let out = lpp_in_basis(&x, x.row_space()?, &combined, m)?;
    warnings.extend(out.warnings);
    finish(x, Method::Adaam, cfg, k, m, knn.bandwidth, out.projection, warnings)
}

/// Baseline: LPP on the k-NN heat kernel itself, same neighborhood policy.
pub fn knn_lpp_fit(raw: &DenseMatrix, cfg: &AdaamConfig) -> Result<AdaamModel> {
    let Prepared { x, k, m } = prepare(raw, cfg)?;
    let knn = knn_heat_kernel(&x, k, cfg.bandwidth, cfg.kernel)?;
    let out = lpp_in_basis(&x, x.row_space()?, &knn.affinity, m)?;
    finish(x, Method::KnnLpp, cfg, k, m, knn.bandwidth, out.projection, out.warnings)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    x: DataMatrix,
    method: Method,
    cfg: &AdaamConfig,
    k: usize,
    m: usize,
    bandwidth: f64,
    projection: Projection,
    warnings: Vec<Warning>,
) -> Result<AdaamModel> {
    let n = x.rows();
    let (_, column_means) = x.into_parts();
    let metric = metric_of(&projection);
    Ok(AdaamModel {
        config: ResolvedConfig {
            method,
            clusters: cfg.clusters,
            neighbors: k,
            dim: m,
            alpha1: cfg.alpha1,
            alpha2: cfg.alpha2,
            bandwidth,
            kernel: cfg.kernel,
            iterations: cfg.iterations,
            diagonal: cfg.diagonal,
        },
        n,
        column_means,
        projection,
        metric,
        warnings,
    })
}
