//! Independent reference implementations used as test oracles. Nothing here
//! calls into the library's numerical routines.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Mat = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Mat {
    (0..rows).map(|_| (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
}

pub fn random_symmetric(rng: &mut impl Rng, n: usize) -> Mat {
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(-1.0..1.0);
            a[i][j] = v;
            a[j][i] = v;
        }
    }
    a
}

pub fn transpose(a: &Mat) -> Mat {
    if a.is_empty() {
        return Vec::new();
    }
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    a.iter()
        .map(|r| (0..cols).map(|j| (0..inner).map(|k| r[k] * b[k][j]).sum()).collect())
        .collect()
}

/// Cyclic Jacobi rotations. Returns eigenvalues ascending and the matching
/// eigenvectors as columns of the second matrix.
pub fn jacobi_eig(a: &Mat) -> (Vec<f64>, Mat) {
    let n = a.len();
    let mut a = a.clone();
    let mut v: Mat = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = (0..n).map(|r| order.iter().map(|&c| v[r][c]).collect()).collect();
    (values, vectors)
}

/// Columns `cols` of `a`.
pub fn columns(a: &Mat, cols: &[usize]) -> Mat {
    a.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect()
}

/// Sine of the largest principal angle between the column spans of two
/// matrices with orthonormal columns, computed from `(I − UUᵀ)V`.
pub fn max_principal_sine(u: &Mat, v: &Mat) -> f64 {
    let utv = matmul(&transpose(u), v);
    let proj = matmul(u, &utv);
    let resid: Mat = v.iter().zip(&proj).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect()).collect();
    let g = matmul(&transpose(&resid), &resid);
    let (vals, _) = jacobi_eig(&g);
    vals.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Groups ascending eigenvalues into clusters separated by more than `gap`.
pub fn clusters(values: &[f64], gap: f64) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match out.last_mut() {
            Some(g) if v - values[*g.last().unwrap()] <= gap => g.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

/// Full sort of all `n²` elements followed by truncation to `t`. Mirrored
/// off-diagonal elements are adjacent in the order and are never split; a
/// single leftover slot can only go to an equally large diagonal element.
pub fn brute_sparsify(a: &Mat, t: usize, diagonal_eligible: bool) -> Mat {
    let n = a.len();
    // (magnitude, upper i, upper j, is_lower)
    let mut all: Vec<(f64, usize, usize, bool)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if a[i][j] == 0.0 || (i == j && !diagonal_eligible) {
                continue;
            }
            all.push((a[i][j].abs(), i.min(j), i.max(j), i > j));
        }
    }
    all.sort_by(|x, y| y.0.total_cmp(&x.0).then((x.1, x.2, x.3).cmp(&(y.1, y.2, y.3))));
    let mut keep = vec![vec![false; n]; n];
    let mut used = 0;
    let mut idx = 0;
    while idx < all.len() && used < t {
        let (mag, i, j, _) = all[idx];
        let width = if i == j { 1 } else { 2 };
        if used + width <= t {
            keep[i][j] = true;
            keep[j][i] = true;
            used += width;
            idx += width;
            continue;
        }
        if let Some(&(_, d, _, _)) = all[idx..].iter().take_while(|e| e.0 == mag).find(|e| e.1 == e.2) {
            keep[d][d] = true;
        }
        break;
    }
    (0..n).map(|i| (0..n).map(|j| if keep[i][j] { a[i][j] } else { 0.0 }).collect()).collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Best total of a square table over all `c!` row-to-column assignments.
pub fn brute_matching_total(table: &[Vec<i64>]) -> i64 {
    permutations(table.len())
        .iter()
        .map(|p| p.iter().enumerate().map(|(r, &c)| table[r][c]).sum())
        .max()
        .unwrap_or(0)
}

/// Accuracy over all label permutations; predicted labels are in `0..c`.
pub fn brute_accuracy(pred: &[usize], truth: &[usize], c: usize) -> f64 {
    let mut table = vec![vec![0i64; c]; c];
    for (&p, &t) in pred.iter().zip(truth) {
        table[p][t] += 1;
    }
    brute_matching_total(&table) as f64 / pred.len() as f64
}

/// Smallest-eigenvalue unit eigenvector of the 2×2 pencil `S a = λ B a`,
/// from the characteristic quadratic `det(S − λB) = 0`.
pub fn pencil_2x2_min(s: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> (f64, [f64; 2]) {
    let qa = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    let qb = -(s[0][0] * b[1][1] + s[1][1] * b[0][0] - s[0][1] * b[1][0] - s[1][0] * b[0][1]);
    let qc = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
    let lambda = if qa.abs() < 1e-300 { -qc / qb } else { (-qb - disc) / (2.0 * qa) };
    let r0 = [s[0][0] - lambda * b[0][0], s[0][1] - lambda * b[0][1]];
    let r1 = [s[1][0] - lambda * b[1][0], s[1][1] - lambda * b[1][1]];
    // Null vector of the better conditioned row.
    let r = if r0[0].hypot(r0[1]) >= r1[0].hypot(r1[1]) { r0 } else { r1 };
    let v = if r[0] == 0.0 && r[1] == 0.0 { [1.0, 0.0] } else { [-r[1], r[0]] };
    let norm = v[0].hypot(v[1]);
    (lambda, [v[0] / norm, v[1] / norm])
}

/// `c` clusters of `per` points: centers uniform in `[-spread, spread]^d`,
/// offsets triangular on `[-1, 1]` per coordinate.
pub fn blobs(rng: &mut impl Rng, c: usize, per: usize, d: usize, spread: f64) -> (Mat, Vec<usize>) {
    let centers = random_matrix(rng, c, d);
    let mut x = Vec::new();
    let mut labels = Vec::new();
    for (k, center) in centers.iter().enumerate() {
        for _ in 0..per {
            x.push(center.iter().map(|m| spread * m + rng.random::<f64>() - rng.random::<f64>()).collect());
            labels.push(k);
        }
    }
    (x, labels)
}

/// Random `n × r` matrix with orthonormal columns (modified Gram-Schmidt).
pub fn random_orthonormal(rng: &mut impl Rng, n: usize, r: usize) -> Mat {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while cols.len() < r {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        for q in &cols {
            let p: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(q).for_each(|(a, b)| *a -= p * b);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(v.into_iter().map(|a| a / norm).collect());
        }
    }
    transpose(&cols)
}
