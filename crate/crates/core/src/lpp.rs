//! Locality Preserving Projections on an arbitrary (possibly signed) affinity,
//! and the Mahalanobis metric induced by a linear projection.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result, Warning};
use crate::graph::{degree, laplacian_quadratic, SparseAffinity};
use crate::linalg::{canonical_sign, generalized_symmetric_eig, GeneralizedEigen};
use crate::matrix::DenseMatrix;

/// A `d × m` linear map; embedded coordinates are `x · matrix`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub matrix: DenseMatrix,
    /// Eigenvalues of the solved problem, ascending, one per column.
    pub eigenvalues: Vec<f64>,
}

impl Projection {
    pub fn input_dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.matrix.cols()
    }

    /// Identity map on `d` dimensions.
    pub fn identity(d: usize) -> Self {
        Self { matrix: DenseMatrix::identity(d), eigenvalues: vec![0.0; d] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LppOutcome {
    pub projection: Projection,
    pub regularization: f64,
    /// Diagonal shift applied to the degrees when the constraint was indefinite.
    pub degree_shift: f64,
    pub warnings: Vec<Warning>,
}

/// `yᵀ diag(w) y`, exactly symmetric.
pub(crate) fn weighted_gram(y: &DenseMatrix, w: &[f64]) -> DenseMatrix {
    let m = y.cols();
    let mut out = DenseMatrix::zeros(m, m);
    for (k, &wk) in w.iter().enumerate() {
        if wk == 0.0 {
            continue;
        }
        let r = y.row(k);
        for a in 0..m {
            let s = wk * r[a];
            if s == 0.0 {
                continue;
            }
            let row = out.row_mut(a);
            for b in a..m {
                row[b] += s * r[b];
            }
        }
    }
    for a in 0..m {
        for b in (a + 1)..m {
            out[(b, a)] = out[(a, b)];
        }
    }
    out
}

/// Maps reduced solutions back to input space and fixes column signs.
pub(crate) fn lift_columns(basis: Option<&DenseMatrix>, z: &DenseMatrix) -> Result<DenseMatrix> {
    let mut a = match basis {
        Some(v) => v.matmul(z)?,
        None => z.clone(),
    };
    let mut col = vec![0.0; a.rows()];
    for k in 0..a.cols() {
        for (i, c) in col.iter_mut().enumerate() {
            *c = a[(i, k)];
        }
        canonical_sign(&mut col);
        a.set_column(k, &col);
    }
    Ok(a)
}

/// Solves `Xᵀ L′ X a = λ Xᵀ D′ X a` for the `m` smallest `λ`, with
/// `D′ = degree(aff)` and `L′ = D′ − aff`.
///
/// When `x` is column-rank deficient the pencil is solved inside its row space
/// (`basis`, columns orthonormal) so that null directions of `x` cannot appear as
/// spurious zero-eigenvalue solutions.
pub fn lpp_in_basis(
    x: &DenseMatrix,
    basis: Option<&DenseMatrix>,
    aff: &SparseAffinity,
    m: usize,
) -> Result<LppOutcome> {
    let (n, d) = x.shape();
    if m > d {
        return Err(Error::RankRequestTooLarge { requested: m, max: d });
    }
    if aff.n() != n {
        return Err(Error::ShapeMismatch {
            context: "lpp affinity",
            expected: (n, n),
            found: (aff.n(), aff.n()),
        });
    }
    let basis = basis.filter(|v| v.cols() >= m);
    let reduced;
    let y = match basis {
        Some(v) => {
            reduced = x.matmul(v)?;
            &reduced
        }
        None => x,
    };

    let s = laplacian_quadratic(aff, y)?;
    let mut degrees = degree(aff).0;
    let mut warnings = Vec::new();
    let mut degree_shift = 0.0;
    let solved: GeneralizedEigen = match generalized_symmetric_eig(&s, &weighted_gram(y, &degrees)) {
        Ok(g) => g,
        Err(Error::NotPsd { .. }) | Err(Error::DegeneratePencil) => {
            let min = degrees.iter().fold(f64::INFINITY, |a, &b| a.min(b));
            let mean_abs = degrees.iter().map(|v| v.abs()).sum::<f64>() / n as f64;
            degree_shift = (-min).max(0.0) + 1e-8 * mean_abs.max(f64::MIN_POSITIVE);
            degrees.iter_mut().for_each(|v| *v += degree_shift);
            warnings.push(Warning::DegreeShift { shift: degree_shift });
            generalized_symmetric_eig(&s, &weighted_gram(y, &degrees))?
        }
        Err(e) => return Err(e),
    };
    if solved.regularization > 0.0 {
        warnings.push(Warning::Regularized { stage: "lpp", epsilon: solved.regularization });
    }
    let keep: Vec<usize> = (0..m).collect();
    let z = solved.pairs.vectors.select_columns(&keep);
    let matrix = lift_columns(basis, &z)?;
    Ok(LppOutcome {
        projection: Projection { matrix, eigenvalues: solved.pairs.values[..m].to_vec() },
        regularization: solved.regularization,
        degree_shift,
        warnings,
    })
}

/// [`lpp_in_basis`] on the full input space.
pub fn lpp(x: &DenseMatrix, aff: &SparseAffinity, m: usize) -> Result<LppOutcome> {
    lpp_in_basis(x, None, aff, m)
}

/// Metric matrix of a projection. With the `d × m` storage used here this is
/// `A Aᵀ`, i.e. the Gram matrix of the map in its `m × d` orientation.
pub fn metric_of(projection: &Projection) -> DenseMatrix {
    projection.matrix.gram_rows()
}

/// `(x − y)ᵀ M (x − y)`.
pub fn mahalanobis(metric: &DenseMatrix, x: &[f64], y: &[f64]) -> f64 {
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let md = metric.mul_vec(&diff);
    diff.iter().zip(&md).map(|(a, b)| a * b).sum()
}

/// Squared Euclidean distance between the projected points.
pub fn projected_distance(projection: &Projection, x: &[f64], y: &[f64]) -> f64 {
    let a = &projection.matrix;
    (0..a.cols())
        .map(|k| {
            let s: f64 = (0..a.rows()).map(|i| a[(i, k)] * (x[i] - y[i])).sum();
            s * s
        })
        .sum()
}
