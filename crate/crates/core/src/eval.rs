//! Clustering evaluation: seeded k-means, rounds of ten restarts keeping the
//! minimum within-cluster sum, and accuracy under optimal cluster/class matching.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// k-means runs per round.
pub const RUNS_PER_ROUND: u64 = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub clusters: usize,
    /// Σ_i ‖y_i − centroid(label_i)‖².
    pub wcss: f64,
    pub iterations_used: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KmeansOptions {
    pub max_iters: usize,
    /// Stop once the relative wcss decrease drops below this.
    pub tol: f64,
}

impl Default for KmeansOptions {
    fn default() -> Self {
        Self { max_iters: 300, tol: 1e-7 }
    }
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn plus_plus_init(y: &DenseMatrix, c: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let n = y.rows();
    let mut centers = DenseMatrix::zeros(c, y.cols());
    let first = rng.random_range(0..n);
    centers.row_mut(0).copy_from_slice(y.row(first));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(y.row(i), centers.row(0))).collect();
    for k in 1..c {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &w) in d2.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                acc += w;
                chosen = Some(i);
                if acc > target {
                    break;
                }
            }
            chosen.unwrap_or(0)
        } else {
            rng.random_range(0..n)
        };
        centers.row_mut(k).copy_from_slice(y.row(pick));
        for (i, di) in d2.iter_mut().enumerate() {
            *di = di.min(sq_dist(y.row(i), centers.row(k)));
        }
    }
    centers
}

fn nearest(point: &[f64], centers: &DenseMatrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for k in 0..centers.rows() {
        let d = sq_dist(point, centers.row(k));
        if d < best.1 {
            best = (k, d);
        }
    }
    best
}

/// Lloyd iterations from a seeded k-means++ start. Returns the assignment and
/// the wcss after every iteration.
pub fn kmeans_traced(
    y: &DenseMatrix,
    c: usize,
    seed: u64,
    opts: KmeansOptions,
) -> Result<(ClusterAssignment, Vec<f64>)> {
    let (n, dim) = y.shape();
    if c > n {
        return Err(Error::ClusterCountTooLarge { c, n });
    }
    if c == 0 {
        return Err(Error::InvalidParameter("cluster count must be at least 1"));
    }
    if !y.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = plus_plus_init(y, c, &mut rng);
    let mut labels = vec![usize::MAX; n];
    let mut dist = vec![0.0; n];
    let mut history = Vec::new();
    let mut iterations_used = 0;
    let mut prev = f64::INFINITY;

    for _ in 0..opts.max_iters.max(1) {
        iterations_used += 1;
        let mut changed = false;
        for i in 0..n {
            let (k, d) = nearest(y.row(i), &centers);
            changed |= labels[i] != k;
            labels[i] = k;
            dist[i] = d;
        }

        // Empty clusters take the point farthest from its centroid.
        let mut counts = vec![0usize; c];
        labels.iter().for_each(|&l| counts[l] += 1);
        for e in 0..c {
            if counts[e] > 0 {
                continue;
            }
            let donor = (0..n)
                .filter(|&i| counts[labels[i]] > 1)
                .fold(None, |best: Option<usize>, i| match best {
                    Some(b) if dist[b] >= dist[i] => Some(b),
                    _ => Some(i),
                });
            if let Some(p) = donor {
                counts[labels[p]] -= 1;
                labels[p] = e;
                counts[e] = 1;
                dist[p] = 0.0;
                changed = true;
            }
        }

        centers = DenseMatrix::zeros(c, dim);
        for (i, &l) in labels.iter().enumerate() {
            centers.row_mut(l).iter_mut().zip(y.row(i)).for_each(|(a, b)| *a += b);
        }
        for (k, &cnt) in counts.iter().enumerate() {
            if cnt > 0 {
                centers.row_mut(k).iter_mut().for_each(|v| *v /= cnt as f64);
            }
        }
        let wcss: f64 = (0..n).map(|i| sq_dist(y.row(i), centers.row(labels[i]))).sum();
        history.push(wcss);
        let converged = !changed || (prev.is_finite() && prev - wcss <= opts.tol * prev);
        prev = wcss;
        if converged {
            break;
        }
    }
    Ok((
        ClusterAssignment { labels, clusters: c, wcss: prev, iterations_used, seed },
        history,
    ))
}

pub fn kmeans(y: &DenseMatrix, c: usize, seed: u64, opts: KmeansOptions) -> Result<ClusterAssignment> {
    kmeans_traced(y, c, seed, opts).map(|(a, _)| a)
}

/// Seed of run `j` within round `round_seed`.
pub fn run_seed(round_seed: u64, j: u64) -> u64 {
    round_seed.wrapping_mul(RUNS_PER_ROUND).wrapping_add(j)
}

/// All runs of one round, in sub-seed order.
pub fn round_runs(
    y: &DenseMatrix,
    c: usize,
    round_seed: u64,
    opts: KmeansOptions,
) -> Result<Vec<ClusterAssignment>> {
    (0..RUNS_PER_ROUND).map(|j| kmeans(y, c, run_seed(round_seed, j), opts)).collect()
}

/// Minimum-wcss run; ties go to the earliest run.
pub fn select_min_wcss(runs: Vec<ClusterAssignment>) -> Option<ClusterAssignment> {
    runs.into_iter().reduce(|best, r| if r.wcss < best.wcss { r } else { best })
}

pub fn kmeans_round(
    y: &DenseMatrix,
    c: usize,
    round_seed: u64,
    opts: KmeansOptions,
) -> Result<ClusterAssignment> {
    let runs = round_runs(y, c, round_seed, opts)?;
    Ok(select_min_wcss(runs).expect("a round has at least one run"))
}

/// Maximum-weight perfect matching on a square table; returns `row → column`.
pub fn max_weight_matching(table: &[Vec<i64>]) -> Vec<usize> {
    let n = table.len();
    if n == 0 {
        return Vec::new();
    }
    // Shortest augmenting paths with potentials on cost = −weight (1-based).
    const INF: i64 = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = -table[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Square contingency table (clusters × classes), zero padded.
pub fn contingency(pred: &[usize], truth: &[usize]) -> Vec<Vec<i64>> {
    let size = pred.iter().chain(truth).map(|&l| l + 1).max().unwrap_or(0);
    let mut table = vec![vec![0i64; size]; size];
    for (&p, &t) in pred.iter().zip(truth) {
        table[p][t] += 1;
    }
    table
}

/// Fraction of samples matched under the best one-to-one cluster/class mapping.
pub fn label_accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch { left: pred.len(), right: truth.len() });
    }
    if pred.is_empty() {
        return Err(Error::InvalidParameter("no samples to score"));
    }
    let table = contingency(pred, truth);
    let matching = max_weight_matching(&table);
    let matched: i64 = matching.iter().enumerate().map(|(r, &c)| table[r][c]).sum();
    Ok(matched as f64 / pred.len() as f64)
}

pub fn accuracy(assign: &ClusterAssignment, truth: &[usize]) -> Result<f64> {
    label_accuracy(&assign.labels, truth)
}

/// Seed of round `r` for a base seed.
pub fn round_seed(seed: u64, r: usize) -> u64 {
    seed.wrapping_add(r as u64)
}

/// Outcome of one evaluation round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub assignment: ClusterAssignment,
    pub accuracy: Option<f64>,
}

/// Per-round results plus summary statistics; accuracies are present only when
/// ground truth was supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundsSummary {
    pub rounds: Vec<RoundOutcome>,
    pub accuracies: Vec<f64>,
    pub average: Option<f64>,
    pub max: Option<f64>,
}

impl RoundsSummary {
    pub fn from_rounds(rounds: Vec<RoundOutcome>) -> Self {
        let accuracies: Vec<f64> = rounds.iter().filter_map(|r| r.accuracy).collect();
        let (average, max) = if accuracies.is_empty() {
            (None, None)
        } else {
            let avg = accuracies.iter().sum::<f64>() / accuracies.len() as f64;
            let max = accuracies.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            (Some(avg), Some(max))
        };
        Self { rounds, accuracies, average, max }
    }
}

/// One scored round.
pub fn evaluate_round(
    y: &DenseMatrix,
    truth: Option<&[usize]>,
    c: usize,
    round_seed: u64,
    opts: KmeansOptions,
) -> Result<RoundOutcome> {
    if let Some(t) = truth {
        if t.len() != y.rows() {
            return Err(Error::LengthMismatch { left: t.len(), right: y.rows() });
        }
    }
    let assignment = kmeans_round(y, c, round_seed, opts)?;
    let accuracy = truth.map(|t| accuracy(&assignment, t)).transpose()?;
    Ok(RoundOutcome { assignment, accuracy })
}

/// Runs `rounds` k-means rounds with seeds derived from `seed`.
pub fn evaluate(
    y: &DenseMatrix,
    truth: Option<&[usize]>,
    c: usize,
    rounds: usize,
    seed: u64,
    opts: KmeansOptions,
) -> Result<RoundsSummary> {
    if rounds == 0 {
        return Err(Error::InvalidParameter("rounds must be at least 1"));
    }
    let outcomes = (0..rounds)
        .map(|r| evaluate_round(y, truth, c, round_seed(seed, r), opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(RoundsSummary::from_rounds(outcomes))
}
