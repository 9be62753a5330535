//! Acceptance suite: one PASS/FAIL line per criterion. Runs as a plain binary
//! (`harness = false`) so the lines are always visible in `cargo test` output.

#![allow(clippy::needless_range_loop)]

#[path = "../../core/tests/support/oracles.rs"]
mod oracles;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use adaam::experiment::evaluate_parallel;
use adaam_core::adaam::{adaam_fit, center, intermediate_affinity, AdaamConfig, RankSpec};
use adaam_core::eval::{
    kmeans, kmeans_round, kmeans_traced, label_accuracy, max_weight_matching, round_runs, KmeansOptions,
};
use adaam_core::graph::{outer_affinity, sparsification_budget, sparsify_top_t, DiagonalPolicy, SparseAffinity};
use adaam_core::linalg::{symmetric_eig, thin_svd};
use adaam_core::lpp::mahalanobis;
use adaam_core::DenseMatrix;
use oracles::Mat;
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, Duration, Box<dyn Fn() -> Option<Outcome>>);

fn dense(a: &Mat) -> DenseMatrix {
    DenseMatrix::from_rows(a).unwrap()
}

fn to_mat(a: &DenseMatrix) -> Mat {
    (0..a.rows()).map(|i| a.row(i).to_vec()).collect()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn spectral_oracles() -> Outcome {
    let mut rng = oracles::rng(0x5eed_0001);
    let (mut worst_value, mut worst_angle) = (0.0f64, 0.0f64);
    for case in 0..200 {
        let n = rng.random_range(1..=12);
        let a = oracles::random_symmetric(&mut rng, n);
        let ours = symmetric_eig(&dense(&a)).map_err(|e| e.to_string())?;
        let (values, vectors) = oracles::jacobi_eig(&a);
        for (x, y) in ours.values.iter().zip(&values) {
            worst_value = worst_value.max((x - y).abs());
        }
        for group in oracles::clusters(&values, 1e-6) {
            let s = oracles::max_principal_sine(
                &oracles::columns(&to_mat(&ours.vectors), &group),
                &oracles::columns(&vectors, &group),
            );
            worst_angle = worst_angle.max(s.asin());
        }
        ensure(worst_value <= 1e-8 && worst_angle <= 1e-6, || {
            format!("eig case {case}: value err {worst_value:e}, angle {worst_angle:e}")
        })?;
    }

    let (mut svd_value, mut svd_angle) = (0.0f64, 0.0f64);
    for case in 0..200 {
        let (n, d) = (rng.random_range(1..=12), rng.random_range(1..=12));
        let x = oracles::random_matrix(&mut rng, n, d);
        let r = n.min(d);
        let svd = thin_svd(&dense(&x), r).map_err(|e| e.to_string())?;
        let (values, vectors) = oracles::jacobi_eig(&oracles::matmul(&x, &oracles::transpose(&x)));
        let top: Vec<usize> = (0..r).map(|k| n - 1 - k).collect();
        for (k, &i) in top.iter().enumerate() {
            svd_value = svd_value.max((svd.singular[k].powi(2) - values[i].max(0.0)).abs());
        }
        // Leading subspaces at every well-separated cut.
        for cut in 1..=r {
            let below = if cut < n { values[n - 1 - cut] } else { f64::NEG_INFINITY };
            if values[n - cut] - below <= 1e-4 || values[n - cut] <= 1e-6 {
                continue;
            }
            let cols: Vec<usize> = (0..cut).collect();
            let s = oracles::max_principal_sine(
                &oracles::columns(&to_mat(&svd.left), &cols),
                &oracles::columns(&vectors, &top[..cut]),
            );
            svd_angle = svd_angle.max(s.asin());
        }
        ensure(svd_value <= 1e-8 && svd_angle <= 1e-6, || {
            format!("svd case {case}: value err {svd_value:e}, angle {svd_angle:e}")
        })?;
    }
    Ok(format!(
        "eig max |Δλ| {worst_value:.1e}, max angle {worst_angle:.1e}; svd max |Δσ²| {svd_value:.1e}, max angle {svd_angle:.1e}"
    ))
}

fn zero_degree_delta() -> Outcome {
    let mut rng = oracles::rng(0x5eed_0002);
    let (mut worst_row, mut worst_col) = (0.0f64, 0.0f64);
    for case in 0..100 {
        let n = rng.random_range(2..=50);
        let d = rng.random_range(1..=10);
        let x = center(&dense(&oracles::random_matrix(&mut rng, n, d))).map_err(|e| e.to_string())?;
        let c = rng.random_range(1..=6);
        let stage = intermediate_affinity(&x, c, RankSpec::Auto, 2.5, DiagonalPolicy::Eligible)
            .map_err(|e| e.to_string())?;
        let p = &stage.factor.p;
        let tol = 1e-8 * (n as f64).sqrt();
        let col = (0..p.cols()).map(|k| p.column(k).iter().sum::<f64>().abs()).fold(0.0, f64::max);
        let delta = outer_affinity(p).to_dense();
        let row = (0..n).map(|i| delta.row(i).iter().sum::<f64>().abs()).fold(0.0, f64::max);
        worst_row = worst_row.max(row / tol);
        worst_col = worst_col.max(col / tol);
        ensure(row <= tol && col <= tol, || format!("case {case}: row sum {row:e}, 1ᵀP {col:e}, tol {tol:e}"))?;
    }
    Ok(format!("max row sum {worst_row:.1e}·tol, max |1ᵀP| {worst_col:.1e}·tol"))
}

fn sparsifier_exactness() -> Outcome {
    let budgets = [((1440, 20, 2.5), 41472), ((1440, 20, 5.0), 20736), ((575, 20, 2.5), 6612), ((575, 20, 5.0), 3306)];
    for ((n, c, alpha), t) in budgets {
        let got = sparsification_budget(n, c, alpha).map_err(|e| e.to_string())?;
        ensure(got == t, || format!("budget({n}, {c}, {alpha}) = {got}, expected {t}"))?;
    }
    let mut rng = oracles::rng(0x5eed_0003);
    let mut cases = 0;
    for &n in &[8usize, 20] {
        for case in 0..150 {
            let ties = case % 2 == 0;
            let mut a = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in i..n {
                    let v = if ties { f64::from(rng.random_range(-3i32..=3)) } else { rng.random_range(-1.0..1.0) };
                    a[i][j] = v;
                    a[j][i] = v;
                }
            }
            let c = rng.random_range(1..=10);
            let alpha = rng.random_range(0.5..6.0);
            for policy in [DiagonalPolicy::Eligible, DiagonalPolicy::Excluded] {
                let aff = SparseAffinity::from_dense(&dense(&a)).map_err(|e| e.to_string())?;
                let out = sparsify_top_t(&aff, c, alpha, policy).map_err(|e| e.to_string())?;
                let expected = oracles::brute_sparsify(&a, out.budget, policy == DiagonalPolicy::Eligible);
                ensure(out.affinity.to_dense() == dense(&expected), || {
                    format!("n={n} case {case} ({policy:?}, t={}) differs from brute force", out.budget)
                })?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} matrices equal to brute force; hand budgets 41472/20736/6612/3306"))
}

fn pipeline_properties() -> Outcome {
    let mut rng = oracles::rng(0x5eed_0004);
    let (mut worst_identity, mut worst_strict) = (0.0f64, 0.0f64);
    for case in 0..12 {
        let c = rng.random_range(2..=4);
        // Includes d > n, where only the row space of X carries information.
        let d = if case % 4 == 3 { 40 } else { rng.random_range(c..=10) };
        let (x, _) = oracles::blobs(&mut rng, c, 8, d, 5.0);
        let x = dense(&x);
        let model = adaam_fit(&x, &AdaamConfig::new(c)).map_err(|e| e.to_string())?;
        let a = &model.projection.matrix;
        let m = model.output_dim();
        ensure(model.metric == a.matmul(&a.transpose()).unwrap(), || format!("case {case}: metric is not A·Aᵀ"))?;
        let e = symmetric_eig(&model.metric).map_err(|e| e.to_string())?;
        let tr = model.metric.trace();
        ensure(e.values[0] >= -1e-10 * tr, || format!("case {case}: metric eigenvalue {:e}", e.values[0]))?;
        let rank = e.values.iter().filter(|&&v| v > 1e-10 * tr).count();
        ensure(rank <= m, || format!("case {case}: metric rank {rank} > m = {m}"))?;
        let y = model.transform(&x).map_err(|e| e.to_string())?;
        let norm_m = *e.values.last().unwrap();
        for _ in 0..20 {
            let (i, j) = (rng.random_range(0..x.rows()), rng.random_range(0..x.rows()));
            let md = mahalanobis(&model.metric, x.row(i), x.row(j));
            let ed: f64 = y.row(i).iter().zip(y.row(j)).map(|(p, q)| (p - q) * (p - q)).sum();
            let raw: f64 = x.row(i).iter().zip(x.row(j)).map(|(p, q)| (p - q) * (p - q)).sum();
            // Rounding in the stored M is of order eps·‖M‖·‖x − y‖², which can
            // exceed eps·ed when the pair nearly coincides after projection.
            let scale = ed.max(norm_m * raw);
            if scale > 0.0 {
                worst_identity = worst_identity.max((md - ed).abs() / scale);
            }
            if ed > 0.0 {
                worst_strict = worst_strict.max((md - ed).abs() / ed);
            }
        }
    }
    ensure(worst_identity <= 1e-8, || format!("distance identity off by {worst_identity:e}"))?;

    // Same fit and evaluation under different thread pools.
    let (x, labels) = oracles::blobs(&mut oracles::rng(7), 4, 30, 12, 3.0);
    let x = dense(&x);
    let mut runs = Vec::new();
    for threads in [1, 2, 4] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let run = pool.install(|| -> Result<_, String> {
            let model = adaam_fit(&x, &AdaamConfig::new(4)).map_err(|e| e.to_string())?;
            let y = model.transform(&x).map_err(|e| e.to_string())?;
            let summary = evaluate_parallel(&y, Some(&labels), 4, 8, 3).map_err(|e| e.to_string())?;
            let bits = |v: &[f64]| v.iter().map(|f| f.to_bits()).collect::<Vec<_>>();
            Ok((
                bits(model.projection.matrix.as_slice()),
                bits(model.metric.as_slice()),
                bits(&summary.accuracies),
                summary.rounds.iter().map(|r| r.assignment.labels.clone()).collect::<Vec<_>>(),
            ))
        })?;
        runs.push(run);
    }
    ensure(runs.windows(2).all(|w| w[0] == w[1]), || "results differ across thread counts".into())?;
    Ok(format!(
        "12 fits: M = A·Aᵀ, PSD, rank ≤ m; identity err {worst_identity:.1e} of ‖M‖‖x−y‖² \
         ({worst_strict:.1e} of the projected distance); bit-identical on 1/2/4 threads"
    ))
}

fn cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_adaam")).args(args).output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("`adaam {}` failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr).trim())
    })
}

fn report_avg(path: &Path) -> Result<f64, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    v["avg"].as_f64().ok_or_else(|| format!("{} has no avg", path.display()))
}

struct Blobs {
    _dir: tempfile::TempDir,
    data: PathBuf,
}

fn blob_benchmark() -> Result<Blobs, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = dir.path().join("blobs.bin");
    let path = data.to_str().unwrap();
    cli(&[
        "synth", "--clusters", "4", "--samples", "400", "--features", "20", "--separation", "10", "--sigma", "1",
        "--seed", "7", "--out", path,
    ])?;
    Ok(Blobs { _dir: dir, data })
}

fn cluster_avg(blobs: &Blobs, method: &str, extra: &[&str]) -> Result<f64, String> {
    let report = blobs.data.with_file_name(format!("{method}-{}.json", extra.join("_")));
    let mut args = vec!["cluster", "--input", blobs.data.to_str().unwrap(), "--method", method, "--rounds", "10"];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--report", report.to_str().unwrap()]);
    cli(&args)?;
    report_avg(&report)
}

fn synthetic_end_to_end() -> Outcome {
    let blobs = blob_benchmark()?;
    let adaam = cluster_avg(&blobs, "adaam", &[])?;
    let raw = cluster_avg(&blobs, "raw", &[])?;
    ensure(adaam >= 0.98 && raw >= 0.95, || format!("adaam avg {adaam:.4}, raw avg {raw:.4}"))?;
    Ok(format!("adaam avg {:.2}%, raw avg {:.2}%", 100.0 * adaam, 100.0 * raw))
}

/// Runs only when `ADAAM_UMIST` names a UMIST export (CSV with a label column
/// named by `ADAAM_UMIST_LABELS`, default `label`, or an AAM1 binary).
fn umist_comparison() -> Option<Outcome> {
    let path = std::env::var_os("ADAAM_UMIST")?;
    let labels = std::env::var("ADAAM_UMIST_LABELS").unwrap_or_else(|_| "label".into());
    Some((|| {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let input = Path::new(&path).to_str().ok_or("non UTF-8 path")?.to_string();
        let mut avg = Vec::new();
        for method in ["adaam", "knn-lpp"] {
            let report = dir.path().join(format!("{method}.json"));
            cli(&[
                "cluster", "--input", &input, "--labels-col", &labels, "--method", method, "--rounds", "10",
                "--report", report.to_str().unwrap(),
            ])?;
            avg.push(report_avg(&report)?);
        }
        let (ours, base) = (100.0 * avg[0], 100.0 * avg[1]);
        ensure(ours - base >= 2.0 && (55.0..=80.0).contains(&ours), || {
            format!("adaam {ours:.2}% vs knn-lpp {base:.2}%")
        })?;
        Ok(format!("adaam {ours:.2}% vs knn-lpp {base:.2}%"))
    })())
}

fn protocol_fidelity() -> Outcome {
    let mut rng = oracles::rng(0x5eed_0007);
    let opts = KmeansOptions::default();
    for case in 0..30 {
        let c = rng.random_range(2..=6);
        let spread = rng.random_range(0.5..4.0);
        let (y, _) = oracles::blobs(&mut rng, c, 10, 3, spread);
        let y = dense(&y);
        let round_seed = rng.random::<u32>() as u64;
        let runs = round_runs(&y, c, round_seed, opts).map_err(|e| e.to_string())?;
        let chosen = kmeans_round(&y, c, round_seed, opts).map_err(|e| e.to_string())?;
        let min = runs.iter().map(|r| r.wcss).fold(f64::INFINITY, f64::min);
        let first = runs.iter().position(|r| r.wcss == min).unwrap();
        ensure(chosen == runs[first], || format!("round {case}: chosen run is not the first min-wcss run"))?;
        for run in &runs {
            let (again, history) = kmeans_traced(&y, c, run.seed, opts).map_err(|e| e.to_string())?;
            ensure(&again == run && again == kmeans(&y, c, run.seed, opts).unwrap(), || {
                format!("round {case}: run not reproducible from its seed")
            })?;
            ensure(history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)), || {
                format!("round {case}: wcss increased: {history:?}")
            })?;
        }
    }
    for case in 0..300 {
        let c = rng.random_range(1..=6);
        let table: Vec<Vec<i64>> = (0..c).map(|_| (0..c).map(|_| rng.random_range(0..40)).collect()).collect();
        let m = max_weight_matching(&table);
        let total: i64 = m.iter().enumerate().map(|(r, &k)| table[r][k]).sum();
        ensure(total == oracles::brute_matching_total(&table), || format!("matching case {case} not optimal"))?;
        let n = rng.random_range(1..60);
        let pred: Vec<usize> = (0..n).map(|_| rng.random_range(0..c)).collect();
        let truth: Vec<usize> = (0..n).map(|_| rng.random_range(0..c)).collect();
        let acc = label_accuracy(&pred, &truth).map_err(|e| e.to_string())?;
        ensure(acc == oracles::brute_accuracy(&pred, &truth, c), || format!("accuracy case {case} differs"))?;
    }
    Ok("30 instrumented rounds pick the min-wcss run; 300 matchings equal c! enumeration; Lloyd wcss monotone".into())
}

fn iteration_stability() -> Outcome {
    let blobs = blob_benchmark()?;
    let once = cluster_avg(&blobs, "adaam", &["--iterations", "1"])?;
    let thrice = cluster_avg(&blobs, "adaam", &["--iterations", "3"])?;
    let gap = 100.0 * (thrice - once).abs();
    ensure(gap <= 2.0, || format!("iterations 1 → {once:.4}, 3 → {thrice:.4}"))?;
    Ok(format!("iterations 1: {:.2}%, 3: {:.2}% (Δ {gap:.2} pp)", 100.0 * once, 100.0 * thrice))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        (1, "spectral core vs oracle", Duration::from_secs(10), Box::new(|| Some(spectral_oracles()))),
        (2, "zero degree of Δ", Duration::from_secs(5), Box::new(|| Some(zero_degree_delta()))),
        (3, "sparsifier exactness", Duration::from_secs(1), Box::new(|| Some(sparsifier_exactness()))),
        (4, "pipeline properties", Duration::from_secs(10), Box::new(|| Some(pipeline_properties()))),
        (5, "synthetic end-to-end", Duration::from_secs(30), Box::new(|| Some(synthetic_end_to_end()))),
        (6, "UMIST comparison", Duration::from_secs(300), Box::new(umist_comparison)),
        (7, "evaluation protocol", Duration::from_secs(10), Box::new(|| Some(protocol_fidelity()))),
        (8, "iteration stability", Duration::from_secs(30), Box::new(|| Some(iteration_stability()))),
    ];
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = outcome.map(|o| {
            o.and_then(|detail| {
                ensure(elapsed <= budget, || format!("{detail}; took longer than the {budget:?} budget"))?;
                Ok(detail)
            })
        });
        let line = match outcome {
            None => format!("SKIP criterion {id} {name}: set ADAAM_UMIST to a dataset export to run"),
            Some(Ok(detail)) => format!("PASS criterion {id} {name}: {detail} [{elapsed:.2?}]"),
            Some(Err(detail)) => {
                failed += 1;
                format!("FAIL criterion {id} {name}: {detail} [{elapsed:.2?}]")
            }
        };
        println!("{line}");
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
