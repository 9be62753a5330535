//! Affinity graphs: the k-NN heat kernel, degrees, Laplacian quadratic forms and
//! the magnitude top-t sparsifier.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result, Warning};
use crate::matrix::{dot, DenseMatrix};

/// One stored off-diagonal weight; `i < j`, and it stands for both (i,j) and (j,i).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// Symmetric sparse matrix of signed weights.
///
/// Off-diagonal pairs are stored once with `i < j`, sorted, without explicit
/// zeros. The diagonal is kept densely.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseAffinity {
    n: usize,
    entries: Vec<Edge>,
    diagonal: Vec<f64>,
}

impl SparseAffinity {
    pub fn empty(n: usize) -> Self {
        Self { n, entries: Vec::new(), diagonal: vec![0.0; n] }
    }

    /// Builds from `(i, j, w)` triplets in any orientation. Zero weights are
    /// dropped; a pair given twice is rejected.
    pub fn from_triplets(
        n: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
        diagonal: Vec<f64>,
    ) -> Result<Self> {
        if diagonal.len() != n {
            return Err(Error::LengthMismatch { left: diagonal.len(), right: n });
        }
        if diagonal.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut entries = Vec::new();
        for (a, b, w) in triplets {
            if a >= n || b >= n || a == b {
                return Err(Error::InvalidParameter("edge index out of range or on the diagonal"));
            }
            if !w.is_finite() {
                return Err(Error::NonFinite);
            }
            if w != 0.0 {
                entries.push(Edge { i: a.min(b), j: a.max(b), weight: w });
            }
        }
        entries.sort_by_key(|e| (e.i, e.j));
        if entries.windows(2).any(|p| p[0].i == p[1].i && p[0].j == p[1].j) {
            return Err(Error::InvalidParameter("duplicate edge"));
        }
        Ok(Self { n, entries, diagonal })
    }

    /// Reads the upper triangle of a symmetric dense matrix.
    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        let n = m.rows();
        if !m.is_square() {
            return Err(Error::ShapeMismatch {
                context: "SparseAffinity::from_dense",
                expected: (n, n),
                found: m.shape(),
            });
        }
        let asym = m.max_asymmetry();
        if asym > 0.0 {
            return Err(Error::NonSymmetric { max_asymmetry: asym });
        }
        let triplets = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j, m[(i, j)])));
        Self::from_triplets(n, triplets, (0..n).map(|i| m[(i, i)]).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Edge] {
        &self.entries
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// Logical element (i, j).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diagonal[i];
        }
        let key = (i.min(j), i.max(j));
        self.entries
            .binary_search_by(|e| (e.i, e.j).cmp(&key))
            .map_or(0.0, |k| self.entries[k].weight)
    }

    /// Nonzero elements of the logical n×n matrix; each stored pair counts twice.
    pub fn nonzero_count(&self) -> usize {
        2 * self.entries.len() + self.diagonal.iter().filter(|&&v| v != 0.0).count()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::from_diagonal(&self.diagonal);
        for e in &self.entries {
            m[(e.i, e.j)] = e.weight;
            m[(e.j, e.i)] = e.weight;
        }
        m
    }

    /// Returns `self + diag(extra)`.
    pub fn with_added_diagonal(&self, extra: &[f64]) -> Result<Self> {
        if extra.len() != self.n {
            return Err(Error::LengthMismatch { left: extra.len(), right: self.n });
        }
        let mut out = self.clone();
        out.diagonal.iter_mut().zip(extra).for_each(|(d, x)| *d += x);
        Ok(out)
    }

    /// Same graph with every weight multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.entries.iter_mut().for_each(|e| e.weight *= s);
        out.entries.retain(|e| e.weight != 0.0);
        out.diagonal.iter_mut().for_each(|d| *d *= s);
        out
    }

    /// Relabels instances: row `i` of the result is row `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::LengthMismatch { left: perm.len(), right: self.n });
        }
        let mut inverse = vec![usize::MAX; self.n];
        for (new, &old) in perm.iter().enumerate() {
            if old >= self.n || inverse[old] != usize::MAX {
                return Err(Error::InvalidParameter("not a permutation"));
            }
            inverse[old] = new;
        }
        let diagonal = perm.iter().map(|&old| self.diagonal[old]).collect();
        Self::from_triplets(
            self.n,
            self.entries.iter().map(|e| (inverse[e.i], inverse[e.j], e.weight)),
            diagonal,
        )
    }

    /// `self · y` for a dense `n × m` operand.
    pub fn mul_dense(&self, y: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_rows(y, "SparseAffinity::mul_dense")?;
        let m = y.cols();
        let mut out = DenseMatrix::zeros(self.n, m);
        for (i, &d) in self.diagonal.iter().enumerate() {
            if d != 0.0 {
                axpy(out.row_mut(i), d, y.row(i));
            }
        }
        for e in &self.entries {
            axpy(out.row_mut(e.i), e.weight, y.row(e.j));
            axpy(out.row_mut(e.j), e.weight, y.row(e.i));
        }
        Ok(out)
    }

    /// `yᵀ · self · y`, exactly symmetric.
    pub fn quadratic_form(&self, y: &DenseMatrix) -> Result<DenseMatrix> {
        let ay = self.mul_dense(y)?;
        Ok(symmetric_cross(y, &ay))
    }

    fn check_rows(&self, y: &DenseMatrix, context: &'static str) -> Result<()> {
        if y.rows() != self.n {
            return Err(Error::ShapeMismatch {
                context,
                expected: (self.n, y.cols()),
                found: y.shape(),
            });
        }
        Ok(())
    }
}

#[inline]
fn axpy(out: &mut [f64], a: f64, x: &[f64]) {
    out.iter_mut().zip(x).for_each(|(o, v)| *o += a * v);
}

/// Upper triangle of `yᵀ z` mirrored to the lower one.
fn symmetric_cross(y: &DenseMatrix, z: &DenseMatrix) -> DenseMatrix {
    let m = y.cols();
    let mut out = DenseMatrix::zeros(m, m);
    for k in 0..y.rows() {
        let yr = y.row(k);
        let zr = z.row(k);
        for a in 0..m {
            let ya = yr[a];
            if ya == 0.0 {
                continue;
            }
            let row = out.row_mut(a);
            for b in a..m {
                row[b] += ya * zr[b];
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

/// Degree diagonal `d_i = Σ_j w_ij` (diagonal included). Signed graphs may
/// produce negative degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDiagonal(pub Vec<f64>);

impl DegreeDiagonal {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

pub fn degree(aff: &SparseAffinity) -> DegreeDiagonal {
    let mut d = aff.diagonal.clone();
    for e in &aff.entries {
        d[e.i] += e.weight;
        d[e.j] += e.weight;
    }
    DegreeDiagonal(d)
}

/// `yᵀ (D − W) y` without forming the Laplacian. Self-loops cancel and are ignored.
pub fn laplacian_quadratic(aff: &SparseAffinity, y: &DenseMatrix) -> Result<DenseMatrix> {
    aff.check_rows(y, "laplacian_quadratic")?;
    let mut off_degree = vec![0.0; aff.n];
    for e in &aff.entries {
        off_degree[e.i] += e.weight;
        off_degree[e.j] += e.weight;
    }
    let mut ly = DenseMatrix::zeros(aff.n, y.cols());
    for (i, &d) in off_degree.iter().enumerate() {
        if d != 0.0 {
            axpy(ly.row_mut(i), d, y.row(i));
        }
    }
    for e in &aff.entries {
        axpy(ly.row_mut(e.i), -e.weight, y.row(e.j));
        axpy(ly.row_mut(e.j), -e.weight, y.row(e.i));
    }
    Ok(symmetric_cross(y, &ly))
}

/// Heat-kernel bandwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// Mean kernel argument over all retained neighbor edges.
    Auto,
    Fixed(f64),
}

/// Argument of the exponential: plain distance, or its square for the usual
/// Gaussian form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelForm {
    #[default]
    Distance,
    SquaredDistance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnGraph {
    pub affinity: SparseAffinity,
    /// Resolved bandwidth actually used.
    pub bandwidth: f64,
}

/// Indices of the `k` nearest other rows of `x` to row `i`, ordered by
/// distance and then index.
pub fn nearest_neighbors(x: &DenseMatrix, i: usize, k: usize) -> Vec<(usize, f64)> {
    let xi = x.row(i);
    let mut cand: Vec<(f64, usize)> = (0..x.rows())
        .filter(|&j| j != i)
        .map(|j| {
            let d2: f64 = xi.iter().zip(x.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            (d2, j)
        })
        .collect();
    let by_dist = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < cand.len() {
        cand.select_nth_unstable_by(k, by_dist);
        cand.truncate(k);
    }
    cand.sort_by(by_dist);
    cand.into_iter().map(|(d2, j)| (j, d2)).collect()
}

/// k-NN heat kernel: `w_ij = exp(-‖x_i − x_j‖ / bandwidth)` whenever either point
/// is among the other's `k` nearest neighbors.
pub fn knn_heat_kernel(
    x: &DenseMatrix,
    k: usize,
    bandwidth: Bandwidth,
    form: KernelForm,
) -> Result<KnnGraph> {
    let n = x.rows();
    if k == 0 || k >= n {
        return Err(Error::KTooLarge { k, n });
    }
    if !x.is_finite() {
        return Err(Error::NonFinite);
    }
    if let Bandwidth::Fixed(b) = bandwidth {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidParameter("bandwidth must be positive and finite"));
        }
    }

    // (i, j, kernel argument) with i < j; sorted and deduplicated below.
    let mut edges: Vec<(usize, usize, f64)> = Vec::with_capacity(n * k);
    for i in 0..n {
        for (j, d2) in nearest_neighbors(x, i, k) {
            let arg = match form {
                KernelForm::Distance => libm::sqrt(d2),
                KernelForm::SquaredDistance => d2,
            };
            edges.push((i.min(j), i.max(j), arg));
        }
    }
    edges.sort_by_key(|e| (e.0, e.1));
    edges.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);

    let bw = match bandwidth {
        Bandwidth::Fixed(b) => b,
        Bandwidth::Auto => {
            let mean = edges.iter().map(|e| e.2).sum::<f64>() / edges.len() as f64;
            if mean <= 0.0 {
                return Err(Error::DegenerateData);
            }
            mean
        }
    };
    let affinity = SparseAffinity::from_triplets(
        n,
        edges.into_iter().map(|(i, j, arg)| (i, j, libm::exp(-arg / bw))),
        vec![0.0; n],
    )?;
    Ok(KnnGraph { affinity, bandwidth: bw })
}

/// Whether diagonal elements compete for the sparsification budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiagonalPolicy {
    #[default]
    Eligible,
    /// Diagonal elements are dropped; the budget goes to off-diagonal pairs.
    Excluded,
}

/// Number of elements kept from an `n × n` matrix: `⌊n² / (α·c)⌋`.
pub fn sparsification_budget(n: usize, c: usize, alpha: f64) -> Result<usize> {
    if c == 0 {
        return Err(Error::InvalidParameter("cluster count must be at least 1"));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter("alpha must be positive and finite"));
    }
    let t = libm::floor((n as f64 * n as f64) / (alpha * c as f64));
    Ok(if t >= usize::MAX as f64 { usize::MAX } else { t as usize })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sparsified {
    pub affinity: SparseAffinity,
    pub budget: usize,
    /// Logical elements retained (pairs count twice); at most `budget`.
    pub kept: usize,
    pub warning: Option<Warning>,
}

/// Keeps the `⌊n²/(α·c)⌋` largest-magnitude elements of a symmetric affinity.
pub fn sparsify_top_t(
    aff: &SparseAffinity,
    c: usize,
    alpha: f64,
    policy: DiagonalPolicy,
) -> Result<Sparsified> {
    let n = aff.n;
    let budget = sparsification_budget(n, c, alpha)?;
    let candidates = aff
        .diagonal
        .iter()
        .enumerate()
        .map(|(i, &w)| (i, i, w))
        .chain(aff.entries.iter().map(|e| (e.i, e.j, e.weight)));
    Ok(select_top(n, budget, candidates, policy))
}

/// Sparsifies `P Pᵀ` for an `n × r` factor, streaming its elements instead of
/// materializing the dense product.
pub fn sparsify_factor(
    p: &DenseMatrix,
    c: usize,
    alpha: f64,
    policy: DiagonalPolicy,
) -> Result<Sparsified> {
    let n = p.rows();
    let budget = sparsification_budget(n, c, alpha)?;
    let candidates =
        (0..n).flat_map(move |i| (i..n).map(move |j| (i, j, dot(p.row(i), p.row(j)))));
    Ok(select_top(n, budget, candidates, policy))
}

/// Unsparsified `P Pᵀ` as an affinity.
pub fn outer_affinity(p: &DenseMatrix) -> SparseAffinity {
    let n = p.rows();
    let diagonal = (0..n).map(|i| dot(p.row(i), p.row(i))).collect();
    let triplets: Vec<_> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j, dot(p.row(i), p.row(j)))))
        .collect();
    SparseAffinity::from_triplets(n, triplets, diagonal)
        .expect("indices are in range and distinct by construction")
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    magnitude: f64,
    i: usize,
    j: usize,
    weight: f64,
}

impl Candidate {
    /// `Less` means `self` is retained before `other`: larger magnitude first,
    /// then lexicographic position of the upper element.
    fn rank(&self, other: &Self) -> Ordering {
        other
            .magnitude
            .total_cmp(&self.magnitude)
            .then(self.i.cmp(&other.i))
            .then(self.j.cmp(&other.j))
    }
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.rank(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    // Max-heap top is the worst-ranked candidate.
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank(other)
    }
}

/// Greedy budgeted selection in rank order. A pair costs two elements and is
/// kept or dropped as a unit. When only one slot remains and the next candidate
/// is a pair, the slot may still go to a diagonal element of identical magnitude;
/// otherwise selection stops one short of the budget.
///
/// Only the best `budget` off-diagonal pairs can ever be taken, so those are
/// tracked with a bounded heap; all diagonal candidates are kept aside.
fn select_top(
    n: usize,
    budget: usize,
    candidates: impl Iterator<Item = (usize, usize, f64)>,
    policy: DiagonalPolicy,
) -> Sparsified {
    let mut heap: BinaryHeap<Candidate> = BinaryHeap::new();
    let mut diagonal_cands = Vec::new();
    for (i, j, w) in candidates {
        if w == 0.0 {
            continue;
        }
        let cand = Candidate { magnitude: w.abs(), i, j, weight: w };
        if i == j {
            if policy == DiagonalPolicy::Eligible {
                diagonal_cands.push(cand);
            }
            continue;
        }
        if heap.len() < budget {
            heap.push(cand);
        } else if let Some(worst) = heap.peek() {
            if cand.rank(worst) == Ordering::Less {
                heap.pop();
                heap.push(cand);
            }
        }
    }
    let mut ordered = heap.into_vec();
    ordered.extend(diagonal_cands);
    ordered.sort_by(Candidate::rank);

    let mut remaining = budget;
    let mut taken: Vec<Candidate> = Vec::new();
    let mut idx = 0;
    while idx < ordered.len() && remaining > 0 {
        let cand = ordered[idx];
        let cost = if cand.i == cand.j { 1 } else { 2 };
        if cost <= remaining {
            taken.push(cand);
            remaining -= cost;
            idx += 1;
            continue;
        }
        // One slot left and a pair in front: only an equally large diagonal may fill it.
        if let Some(d) = ordered[idx + 1..]
            .iter()
            .take_while(|o| o.magnitude == cand.magnitude)
            .find(|o| o.i == o.j)
        {
            taken.push(*d);
            remaining -= 1;
        }
        break;
    }

    let mut diagonal = vec![0.0; n];
    let mut edges = Vec::with_capacity(taken.len());
    for c in &taken {
        if c.i == c.j {
            diagonal[c.i] = c.weight;
        } else {
            edges.push((c.i, c.j, c.weight));
        }
    }
    let affinity = SparseAffinity::from_triplets(n, edges, diagonal)
        .expect("selected candidates are distinct and in range");
    let warning = (budget < n).then_some(Warning::BudgetTooSmall { budget, n });
    Sparsified { kept: budget - remaining, affinity, budget, warning }
}
