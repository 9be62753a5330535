//! Spectral primitives: symmetric eigendecomposition, the generalized symmetric
//! pencil, and a thin SVD built on the smaller Gram matrix.
//!
//! The symmetric solver is a Householder tridiagonalization followed by implicit
//! QL iterations. Every returned vector goes through [`canonical_sign`] so that
//! results are reproducible bit-for-bit.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{dot, norm, DenseMatrix};

/// Relative symmetry tolerance accepted by the eigen solvers.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Singular values at or below this fraction of the largest are treated as zero.
pub const RANK_CUTOFF: f64 = 1e-10;
/// Relative band used to decide that two entries share the largest magnitude.
const SIGN_TIE_TOL: f64 = 1e-10;

/// Eigenvalues in ascending order with matching eigenvector columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }
}

/// Result of [`generalized_symmetric_eig`]; `regularization` is the ε that was
/// added to the constraint diagonal (zero when none was needed).
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedEigen {
    pub pairs: EigenPairs,
    pub regularization: f64,
}

/// Top singular triplets, singular values descending.
#[derive(Debug, Clone, PartialEq)]
pub struct ThinSvd {
    pub left: DenseMatrix,
    pub singular: Vec<f64>,
    pub right: DenseMatrix,
}

impl ThinSvd {
    /// Number of singular values above [`RANK_CUTOFF`] relative to the largest.
    pub fn numerical_rank(&self) -> usize {
        numerical_rank(&self.singular)
    }
}

pub fn numerical_rank(singular: &[f64]) -> usize {
    let max = singular.iter().fold(0.0f64, |m, &s| m.max(s));
    if max <= 0.0 {
        return 0;
    }
    singular.iter().filter(|&&s| s > RANK_CUTOFF * max).count()
}

/// Flips `v` so that its largest-magnitude entry is positive. Entries within a
/// tiny relative band of the maximum count as tied; the lowest index wins.
pub fn canonical_sign(v: &mut [f64]) -> bool {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return false;
    }
    let lead = v
        .iter()
        .position(|x| x.abs() >= max * (1.0 - SIGN_TIE_TOL))
        .unwrap_or(0);
    if v[lead] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
        true
    } else {
        false
    }
}

fn check_symmetric(s: &DenseMatrix, context: &'static str) -> Result<()> {
    if !s.is_square() {
        return Err(Error::ShapeMismatch {
            context,
            expected: (s.rows(), s.rows()),
            found: s.shape(),
        });
    }
    if !s.is_finite() {
        return Err(Error::NonFinite);
    }
    let asym = s.max_asymmetry();
    if asym > SYMMETRY_TOL * s.max_abs() {
        return Err(Error::NonSymmetric { max_asymmetry: asym });
    }
    Ok(())
}

/// Full spectrum of a symmetric matrix, ascending.
pub fn symmetric_eig(s: &DenseMatrix) -> Result<EigenPairs> {
    check_symmetric(s, "symmetric_eig")?;
    let n = s.rows();
    if n == 0 {
        return Ok(EigenPairs { values: Vec::new(), vectors: DenseMatrix::zeros(0, 0) });
    }
    // Row-major working copy; tred2 reads the lower triangle.
    let mut v: Vec<f64> = s.as_slice().to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(n, &mut v, &mut d, &mut e);

    // QL rotations walk pairs of eigenvector columns; transposing first makes them rows.
    let mut vt = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            vt[j * n + i] = v[i * n + j];
        }
    }
    tridiagonal_ql(n, &mut vt, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));

    let mut vectors = DenseMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    let mut col = vec![0.0; n];
    for (k, &src) in order.iter().enumerate() {
        values.push(d[src]);
        col.copy_from_slice(&vt[src * n..(src + 1) * n]);
        canonical_sign(&mut col);
        vectors.set_column(k, &col);
    }
    Ok(EigenPairs { values, vectors })
}

/// Householder reduction to tridiagonal form (EISPACK tred2). On return `v`
/// holds the accumulated orthogonal transform, `d` the diagonal and `e` the
/// subdiagonal in `e[1..]`.
fn tridiagonalize(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let idx = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
                v[idx(j, i)] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = libm::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[idx(j, i)] = f;
                g = e[j] + v[idx(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[idx(k, j)] * d[k];
                    e[k] += v[idx(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[idx(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n.saturating_sub(1) {
        v[idx(n - 1, i)] = v[idx(i, i)];
        v[idx(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[idx(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[idx(k, i + 1)] * v[idx(k, j)];
                }
                for k in 0..=i {
                    v[idx(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[idx(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
        v[idx(n - 1, j)] = 0.0;
    }
    v[idx(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on the tridiagonal (EISPACK tql2). `vt` stores eigenvectors as rows.
fn tridiagonal_ql(n: usize, vt: &mut [f64], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = f64::EPSILON;
    let max_sweeps = 60 * n.max(1);
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > max_sweeps {
                    return Err(Error::NoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (lo, hi) = vt.split_at_mut((i + 1) * n);
                    let vi = &mut lo[i * n..];
                    let vi1 = &mut hi[..n];
                    for (a, b) in vi.iter_mut().zip(vi1.iter_mut()) {
                        let t = *b;
                        *b = s * *a + c * t;
                        *a = c * *a - s * t;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Solves `S v = λ B v` for symmetric `S` and positive-semidefinite `B`.
///
/// `B` is whitened through its own eigendecomposition. When its smallest
/// eigenvalue falls below `1e-10 · trace(B)/dim`, `ε = 1e-8 · trace(B)/dim` is
/// added to the diagonal first and reported back. Returned vectors satisfy
/// `vᵀ (B + εI) v = 1`.
pub fn generalized_symmetric_eig(s: &DenseMatrix, b: &DenseMatrix) -> Result<GeneralizedEigen> {
    check_symmetric(s, "generalized_symmetric_eig: S")?;
    check_symmetric(b, "generalized_symmetric_eig: B")?;
    if s.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            context: "generalized_symmetric_eig",
            expected: s.shape(),
            found: b.shape(),
        });
    }
    let dim = s.rows();
    if dim == 0 {
        return Ok(GeneralizedEigen {
            pairs: EigenPairs { values: Vec::new(), vectors: DenseMatrix::zeros(0, 0) },
            regularization: 0.0,
        });
    }
    let b_eig = symmetric_eig(b)?;
    let scale = b.trace() / dim as f64;
    let min_eig = b_eig.values[0];
    if scale <= 0.0 {
        return if min_eig < 0.0 {
            Err(Error::NotPsd { min_eigenvalue: min_eig })
        } else {
            Err(Error::DegeneratePencil)
        };
    }
    if min_eig < -1e-8 * scale {
        return Err(Error::NotPsd { min_eigenvalue: min_eig });
    }
    let regularization = if min_eig < RANK_CUTOFF * scale { 1e-8 * scale } else { 0.0 };

    // W = U diag((λ+ε)^{-1/2}) so that Wᵀ B W = I.
    let floor = 1e-12 * scale;
    let inv_sqrt: Vec<f64> = b_eig
        .values
        .iter()
        .map(|&l| 1.0 / libm::sqrt((l + regularization).max(floor)))
        .collect();
    let mut w = b_eig.vectors;
    for i in 0..dim {
        for (x, &f) in w.row_mut(i).iter_mut().zip(&inv_sqrt) {
            *x *= f;
        }
    }
    let sw = s.matmul(&w)?;
    let mut reduced = w.transpose_matmul(&sw)?;
    reduced.symmetrize();
    let inner = symmetric_eig(&reduced)?;

    let mut vectors = w.matmul(&inner.vectors)?;
    let mut col = vec![0.0; dim];
    for k in 0..dim {
        for (i, c) in col.iter_mut().enumerate() {
            *c = vectors[(i, k)];
        }
        canonical_sign(&mut col);
        vectors.set_column(k, &col);
    }
    Ok(GeneralizedEigen {
        pairs: EigenPairs { values: inner.values, vectors },
        regularization,
    })
}

/// Top-`r` singular triplets of `x`.
///
/// The cost depends on `min(rows, cols)`: the smaller Gram matrix (`XᵀX` when
/// `cols <= rows`, otherwise `XXᵀ`) is eigendecomposed and the opposite factor is
/// recovered by one multiplication and re-orthonormalized. Left columns follow
/// [`canonical_sign`]; right columns are flipped with them.
pub fn thin_svd(x: &DenseMatrix, r: usize) -> Result<ThinSvd> {
    let (n, d) = x.shape();
    let max = n.min(d);
    if r > max {
        return Err(Error::RankRequestTooLarge { requested: r, max });
    }
    if !x.is_finite() {
        return Err(Error::NonFinite);
    }
    let use_cols = d <= n;
    let gram = if use_cols { x.gram_columns() } else { x.gram_rows() };
    let eig = symmetric_eig(&gram)?;
    let g = eig.len();

    let mut primary = DenseMatrix::zeros(g, r);
    let mut derived = DenseMatrix::zeros(if use_cols { n } else { d }, r);
    let mut singular = Vec::with_capacity(r);
    let xt = if use_cols { None } else { Some(x.transpose()) };
    for k in 0..r {
        let src = g - 1 - k;
        let v = eig.vector(src);
        let u = match &xt {
            None => x.mul_vec(&v),
            Some(t) => t.mul_vec(&v),
        };
        singular.push(norm(&u));
        primary.set_column(k, &v);
        derived.set_column(k, &u);
    }
    let sigma_max = singular.first().copied().unwrap_or(0.0);
    orthonormalize_columns(&mut derived, &singular, sigma_max);

    let (mut left, mut right) = if use_cols { (derived, primary) } else { (primary, derived) };
    let mut col = vec![0.0; left.rows()];
    for k in 0..r {
        for (i, c) in col.iter_mut().enumerate() {
            *c = left[(i, k)];
        }
        if canonical_sign(&mut col) {
            left.set_column(k, &col);
            for i in 0..right.rows() {
                right[(i, k)] = -right[(i, k)];
            }
        }
    }
    Ok(ThinSvd { left, singular, right })
}

/// Modified Gram-Schmidt with one re-orthogonalization pass. Columns whose
/// singular value is at or below the rank cutoff, or which collapse under
/// projection, are replaced by the standard basis vector with the largest
/// residual.
fn orthonormalize_columns(m: &mut DenseMatrix, singular: &[f64], sigma_max: f64) {
    let (rows, cols) = m.shape();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cols);
    for k in 0..cols {
        let mut v = m.column(k);
        let original = norm(&v);
        let usable = singular[k] > RANK_CUTOFF * sigma_max && original > 0.0;
        let mut ok = false;
        if usable {
            for _ in 0..2 {
                for b in &basis {
                    let p = dot(&v, b);
                    v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
                }
            }
            let nv = norm(&v);
            if nv > 1e-6 * original {
                v.iter_mut().for_each(|x| *x /= nv);
                ok = true;
            }
        }
        if !ok {
            v = completion_vector(rows, &basis);
        }
        m.set_column(k, &v);
        basis.push(v);
    }
}

fn completion_vector(rows: usize, basis: &[Vec<f64>]) -> Vec<f64> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for i in 0..rows {
        let mut e = vec![0.0; rows];
        e[i] = 1.0;
        for _ in 0..2 {
            for b in basis {
                let p = dot(&e, b);
                e.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
        }
        let ne = norm(&e);
        if best.as_ref().is_none_or(|(bn, _)| ne > *bn * (1.0 + 1e-12)) {
            best = Some((ne, e));
        }
    }
    let (ne, mut e) = best.unwrap_or((1.0, vec![0.0; rows]));
    if ne > 0.0 {
        e.iter_mut().for_each(|x| *x /= ne);
    }
    e
}

/// Orthonormal basis of the row space of `x` (columns, `cols × rank`), or `None`
/// when `x` already has full column rank.
pub fn row_space_basis(x: &DenseMatrix) -> Result<Option<DenseMatrix>> {
    let (n, d) = x.shape();
    let full = n.min(d);
    let svd = thin_svd(x, full)?;
    let rank = svd.numerical_rank();
    if rank == d {
        return Ok(None);
    }
    let keep: Vec<usize> = (0..rank).collect();
    Ok(Some(svd.right.select_columns(&keep)))
}
