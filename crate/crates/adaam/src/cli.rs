//! Command-line surface.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dataset::{load_any, save_binary, save_csv, write_csv, LabelColumn, LabeledDataset};
use crate::error::{AppError, Result};
use crate::experiment::{fit_method, resolve_clusters, run_cluster, thread_pool, ClusterRequest, FitOptions};
use crate::model_io::{load_model, save_model};
use crate::report::{write_reports, ClusterReport, MethodName};
use crate::synth::{synth_blobs, BlobParams};

#[derive(Debug, Parser)]
#[command(name = "adaam", version, about = "Adaptive affinity metric learning and clustering evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Learn a projection and write it as a JSON model.
    Fit(FitCmd),
    /// Embed a dataset with a fitted model and write CSV.
    Transform(TransformCmd),
    /// Fit, embed and score k-means rounds on one dataset.
    Cluster(ClusterCmd),
    /// Run several datasets and methods and print a table.
    Bench(BenchCmd),
    /// Generate Gaussian blobs.
    Synth(SynthCmd),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// CSV or AAM1 binary dataset.
    #[arg(long)]
    input: PathBuf,
    /// Label column of a CSV input, by 0-based index or header name.
    #[arg(long = "labels-col")]
    labels_col: Option<LabelColumn>,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Number of clusters; defaults to the number of label classes.
    #[arg(long)]
    clusters: Option<usize>,
    /// Neighbors in the k-NN graph; defaults to round(log2(n/c)).
    #[arg(long)]
    k: Option<usize>,
    /// Output dimension; defaults to the cluster count.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, default_value_t = 2.5)]
    alpha1: f64,
    #[arg(long, default_value_t = 5.0)]
    alpha2: f64,
    /// Heat kernel bandwidth; defaults to the mean kernel argument over edges.
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Use exp(-|xi-xj|^2 / t) instead of exp(-|xi-xj| / t).
    #[arg(long = "squared-kernel")]
    squared_kernel: bool,
    #[arg(long, default_value_t = 1)]
    iterations: usize,
    /// Keep diagonal entries out of the sparsified affinities.
    #[arg(long = "exclude-diagonal")]
    exclude_diagonal: bool,
}

impl FitArgs {
    fn options(&self) -> FitOptions {
        FitOptions {
            k: self.k,
            dim: self.dim,
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            bandwidth: self.bandwidth,
            squared_kernel: self.squared_kernel,
            iterations: self.iterations,
            exclude_diagonal: self.exclude_diagonal,
        }
    }
}

#[derive(Debug, Args)]
struct FitCmd {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    fit: FitArgs,
    #[arg(long, value_enum, default_value_t = MethodName::Adaam)]
    method: MethodName,
    /// Model JSON path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TransformCmd {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    input: InputArgs,
    /// Embedded CSV path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ClusterCmd {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    fit: FitArgs,
    #[arg(long, value_enum, default_value_t = MethodName::Adaam)]
    method: MethodName,
    #[arg(long, default_value_t = 100)]
    rounds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Scale each column to unit variance before fitting.
    #[arg(long)]
    standardize: bool,
    /// JSON report path.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchCmd {
    /// Datasets to run; repeat the flag for several.
    #[arg(long, required = true)]
    input: Vec<PathBuf>,
    #[arg(long = "labels-col")]
    labels_col: Option<LabelColumn>,
    #[command(flatten)]
    fit: FitArgs,
    /// Methods to compare.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [MethodName::Adaam, MethodName::KnnLpp, MethodName::Raw])]
    method: Vec<MethodName>,
    #[arg(long, default_value_t = 100)]
    rounds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    standardize: bool,
    /// Also rerun the learned methods for each of these neighbor counts.
    #[arg(long = "k-sweep", value_delimiter = ',')]
    k_sweep: Vec<usize>,
    /// Rounds per k-sweep point.
    #[arg(long = "sweep-rounds", default_value_t = 10)]
    sweep_rounds: usize,
    /// JSON array of all reports.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthCmd {
    #[arg(long)]
    clusters: usize,
    #[arg(long)]
    samples: usize,
    #[arg(long)]
    features: usize,
    /// Minimum center distance in units of sigma.
    #[arg(long, default_value_t = 10.0)]
    separation: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; `.bin` writes AAM1 binary, anything else CSV.
    #[arg(long)]
    out: PathBuf,
}

/// Parses `argv` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("adaam: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Fit(c) => fit(c),
        Command::Transform(c) => transform(c),
        Command::Cluster(c) => cluster(c),
        Command::Bench(c) => bench(c),
        Command::Synth(c) => synth(c),
    }
}

fn load(input: &InputArgs) -> Result<LabeledDataset> {
    load_any(&input.input, input.labels_col.as_ref())
}

fn fit(cmd: FitCmd) -> Result<()> {
    if cmd.method == MethodName::Raw {
        return Err(AppError::Usage("fit needs a learned method (adaam or knn-lpp)".into()));
    }
    let ds = load(&cmd.input)?;
    let c = resolve_clusters(&ds, cmd.fit.clusters)?;
    let model = fit_method(cmd.method, &ds.x, c, &cmd.fit.options())?.expect("learned method");
    for w in &model.warnings {
        eprintln!("adaam: warning: {w}");
    }
    save_model(&model, &cmd.out)
}

fn transform(cmd: TransformCmd) -> Result<()> {
    let model = load_model(&cmd.model)?;
    let ds = load(&cmd.input)?;
    let y = model.transform(&ds.x)?;
    let labels = ds.labels.as_deref();
    match &cmd.out {
        Some(path) => {
            let mut buf = Vec::new();
            write_csv(&y, labels, "y", &mut buf)?;
            fs::write(path, buf).map_err(|e| AppError::io(path, e))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_csv(&y, labels, "y", &mut lock)?;
            lock.flush().map_err(|e| AppError::io("<stdout>", e))
        }
    }
}

fn print_table(reports: &[ClusterReport]) {
    println!("{}", ClusterReport::table_header());
    for r in reports {
        println!("{}", r.table_row());
    }
}

fn cluster(cmd: ClusterCmd) -> Result<()> {
    let ds = load(&cmd.input)?;
    let req = ClusterRequest {
        method: cmd.method,
        clusters: cmd.fit.clusters,
        fit: cmd.fit.options(),
        rounds: cmd.rounds,
        seed: cmd.seed,
        standardize: cmd.standardize,
    };
    let report = thread_pool()?.install(|| run_cluster(&ds, &req))?;
    print_table(std::slice::from_ref(&report));
    if let Some(path) = &cmd.report {
        write_reports(std::slice::from_ref(&report), path)?;
    }
    Ok(())
}

fn bench(cmd: BenchCmd) -> Result<()> {
    let pool = thread_pool()?;
    let base = cmd.fit.options();
    let mut reports = Vec::new();
    for path in &cmd.input {
        let ds = load_any(path, cmd.labels_col.as_ref())?;
        for &method in &cmd.method {
            let req = ClusterRequest {
                method,
                clusters: cmd.fit.clusters,
                fit: base.clone(),
                rounds: cmd.rounds,
                seed: cmd.seed,
                standardize: cmd.standardize,
            };
            reports.push(pool.install(|| run_cluster(&ds, &req))?);
        }
        for &k in &cmd.k_sweep {
            for &method in cmd.method.iter().filter(|m| **m != MethodName::Raw) {
                let req = ClusterRequest {
                    method,
                    clusters: cmd.fit.clusters,
                    fit: FitOptions { k: Some(k), ..base.clone() },
                    rounds: cmd.sweep_rounds,
                    seed: cmd.seed,
                    standardize: cmd.standardize,
                };
                reports.push(pool.install(|| run_cluster(&ds, &req))?);
            }
        }
    }
    print_table(&reports);
    if let Some(path) = &cmd.report {
        write_reports(&reports, path)?;
    }
    Ok(())
}

fn is_binary_path(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("bin"))
}

fn synth(cmd: SynthCmd) -> Result<()> {
    let ds = synth_blobs(&BlobParams {
        clusters: cmd.clusters,
        samples: cmd.samples,
        features: cmd.features,
        separation: cmd.separation,
        sigma: cmd.sigma,
        seed: cmd.seed,
    })?;
    if is_binary_path(&cmd.out) {
        save_binary(&ds, &cmd.out)
    } else {
        save_csv(&ds, &cmd.out)
    }
}
