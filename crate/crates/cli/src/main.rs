//! Command-line surface binding ingestion, filtering, evaluation, and bound
//! verification into reproducible runs.
//!
//! Every run that writes data also writes a JSON sidecar (`<output>.json`,
//! schema 1) echoing the fully resolved configuration, the seed, the wall
//! time, and the flag count. Stdout carries only a summary table.
//!
//! Exit codes: 0 success, 1 verification found violated records, 2 invalid
//! arguments (including oracle size limits), 3 I/O failures, 4 numeric or
//! contract violations in the data (NaN cells, parse errors).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use swad_core::dataio::{
    generate_mixture, load_csv, load_labeled_csv, save_report, standardize, MixtureSpec,
};
use swad_core::eval::{epsilon_sweep, verify_bounds, SweepPoint};
use swad_core::filters::{
    fead_filter, sswad_filter, swad_filter, FeadParams, OutlierReport, SswadParams, SwadParams,
};
use swad_core::{Dataset, Error, Result};

#[derive(Parser)]
#[command(
    name = "swad",
    version,
    about = "Sliced-Wasserstein outlier filtering for training-data selection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an outlier filter over a CSV and write a report
    Filter(FilterArgs),
    /// Check the closed-form leave-one-out transport bounds against the
    /// exact oracle
    VerifyBounds(VerifyBoundsArgs),
    /// Generate the synthetic three-regime mixture dataset
    Synth(SynthArgs),
    /// Run a filter against ground-truth labels and print metrics
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Swad,
    Sswad,
    Fead,
}

impl std::fmt::Display for MethodArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MethodArg::Swad => "swad",
            MethodArg::Sswad => "sswad",
            MethodArg::Fead => "fead",
        })
    }
}

#[derive(Args)]
struct FilterArgs {
    /// Which filter to run
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Input CSV (numeric cells; header expected unless --no-header)
    #[arg(long)]
    input: PathBuf,
    /// Report CSV to write (a .json sidecar is written next to it)
    #[arg(long)]
    output: PathBuf,
    /// The input CSV has no header row
    #[arg(long)]
    no_header: bool,
    /// Transport order t >= 1
    #[arg(long, default_value_t = 2.0)]
    t: f64,
    /// Sliced-distance vote threshold (swad/sswad)
    #[arg(long)]
    epsilon: Option<f64>,
    /// Scaled-Euclidean vote threshold (fead)
    #[arg(long)]
    eta: Option<f64>,
    /// Votes per sample (n)
    #[arg(long, default_value_t = 150)]
    n_votes: usize,
    /// Voting threshold p in [0, 1]
    #[arg(long, default_value_t = 0.8)]
    p: f64,
    /// Projection directions (L) for swad/sswad
    #[arg(long, default_value_t = 40)]
    projections: usize,
    /// Clusters (K) for sswad
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Splits per cluster (S) for sswad
    #[arg(long, default_value_t = 3)]
    s: usize,
    /// Seed for directions, votes, clustering, and splits
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Standardize features (population z-score) before filtering
    #[arg(long)]
    standardize: bool,
    /// Worker threads (0 = all cores); never changes numeric output
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct VerifyBoundsArgs {
    /// Gaussian sample count N (at most 512, the oracle limit)
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Feature dimension
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Orders t to check, comma separated
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0])]
    t: Vec<f64>,
    /// Leave-one-out pairs to sample (all pairs if fewer exist)
    #[arg(long, default_value_t = 200)]
    pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optional CSV with one record per checked pair and order
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct SynthArgs {
    /// Dataset CSV to write (features c0, c1 and a "label" column)
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    /// Which filter to run
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Labeled CSV: numeric features plus one label column
    #[arg(long)]
    input: PathBuf,
    /// Header name of the ground-truth column ("outlier"/"1"/"true" means
    /// positive)
    #[arg(long, default_value = "label")]
    label_column: String,
    #[arg(long, default_value_t = 2.0)]
    t: f64,
    /// Vote threshold for a single run (epsilon for swad/sswad, eta for
    /// fead)
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    /// Ascending thresholds to sweep instead of a single run
    #[arg(long, value_delimiter = ',')]
    epsilon_grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 150)]
    n_votes: usize,
    #[arg(long, default_value_t = 0.8)]
    p: f64,
    #[arg(long, default_value_t = 40)]
    projections: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 3)]
    s: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    standardize: bool,
    /// Optional CSV with one row per sweep point
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_)
        | Error::DimensionMismatch { .. }
        | Error::CardinalityMismatch { .. }
        | Error::SizeLimit { .. } => 2,
        Error::Io { .. } => 3,
        Error::NonFinite { .. } | Error::Parse { .. } => 4,
    }
}

fn init_threads(threads: usize) {
    if threads > 0 {
        // Ignore the error if a pool already exists (e.g. under a test
        // harness); the determinism contract makes the count irrelevant to
        // the results.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Filter(args) => cmd_filter(args),
        Command::VerifyBounds(args) => cmd_verify_bounds(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn required_threshold(value: Option<f64>, flag: &str, method: MethodArg) -> Result<f64> {
    value.ok_or_else(|| Error::InvalidArgument(format!("--method {method} requires --{flag}")))
}

fn run_filter_method(data: &Dataset, args: &FilterArgs) -> Result<OutlierReport> {
    match args.method {
        MethodArg::Swad => {
            let params = SwadParams {
                t: args.t,
                epsilon: required_threshold(args.epsilon, "epsilon", args.method)?,
                n_votes: args.n_votes,
                p_threshold: args.p,
                n_projections: args.projections,
                seed: args.seed,
            };
            swad_filter(data, &params)
        }
        MethodArg::Sswad => {
            let params = SswadParams {
                base: SwadParams {
                    t: args.t,
                    epsilon: required_threshold(args.epsilon, "epsilon", args.method)?,
                    n_votes: args.n_votes,
                    p_threshold: args.p,
                    n_projections: args.projections,
                    seed: args.seed,
                },
                k_clusters: args.k,
                s_splits: args.s,
            };
            sswad_filter(data, &params)
        }
        MethodArg::Fead => {
            let params = FeadParams {
                t: args.t,
                eta: required_threshold(args.eta, "eta", args.method)?,
                n_votes: args.n_votes,
                p_threshold: args.p,
                seed: args.seed,
            };
            fead_filter(data, &params)
        }
    }
}

fn cmd_filter(args: FilterArgs) -> Result<ExitCode> {
    init_threads(args.threads);
    let started = Instant::now();
    let raw = load_csv(&args.input, !args.no_header)?;
    let data = if args.standardize {
        standardize(&raw)?.0
    } else {
        raw
    };
    let report = run_filter_method(&data, &args)?;
    save_report(&report, &data, &args.output)?;
    let wall_time_s = started.elapsed().as_secs_f64();

    let sidecar = serde_json::json!({
        "schema": 1,
        "command": "filter",
        "method": args.method.to_string(),
        "params": report.params_echo,
        "seed": args.seed,
        "threads": args.threads,
        "standardize": args.standardize,
        "input": args.input.display().to_string(),
        "output": args.output.display().to_string(),
        "n_rows": data.n_rows(),
        "n_cols": data.n_cols(),
        "n_flagged": report.n_flagged(),
        "warnings": report.warnings,
        "wall_time_s": wall_time_s,
    });
    write_sidecar(&args.output, &sidecar)?;

    println!("method rows flagged seconds");
    println!(
        "{} {} {} {:.3}",
        args.method,
        data.n_rows(),
        report.n_flagged(),
        wall_time_s
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify_bounds(args: VerifyBoundsArgs) -> Result<ExitCode> {
    init_threads(args.threads);
    let started = Instant::now();
    let records = verify_bounds(args.n, args.d, &args.t, args.pairs, args.seed)?;
    let satisfied = records.iter().filter(|r| r.satisfied).count();
    let all_ok = satisfied == records.len();

    if let Some(path) = &args.output {
        let mut out = String::from("k,l,t,lower,exact,upper,satisfied\n");
        for r in &records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.k,
                r.l,
                r.t,
                r.lower,
                r.exact,
                r.upper,
                if r.satisfied { 1 } else { 0 }
            ));
        }
        std::fs::write(path, out).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let sidecar = serde_json::json!({
            "schema": 1,
            "command": "verify-bounds",
            "n": args.n,
            "d": args.d,
            "t": args.t,
            "pairs": args.pairs,
            "seed": args.seed,
            "threads": args.threads,
            "output": path.display().to_string(),
            "records": records.len(),
            "satisfied": satisfied,
            "wall_time_s": started.elapsed().as_secs_f64(),
        });
        write_sidecar(path, &sidecar)?;
    }

    println!("n d pairs records satisfied fraction seconds");
    println!(
        "{} {} {} {} {} {:.6} {:.3}",
        args.n,
        args.d,
        args.pairs,
        records.len(),
        satisfied,
        satisfied as f64 / records.len() as f64,
        started.elapsed().as_secs_f64()
    );
    Ok(if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_synth(args: SynthArgs) -> Result<ExitCode> {
    let spec = MixtureSpec::three_gaussian_default(args.seed);
    let (data, labels) = generate_mixture(&spec)?;
    let mut out = String::new();
    out.push_str(&data.column_names().join(","));
    out.push_str(",label\n");
    for (row, label) in data.rows().zip(&labels) {
        for x in row {
            out.push_str(&format!("{x},"));
        }
        out.push_str(label.as_str());
        out.push('\n');
    }
    std::fs::write(&args.output, out).map_err(|e| Error::Io {
        path: args.output.display().to_string(),
        source: e,
    })?;

    let sidecar = serde_json::json!({
        "schema": 1,
        "command": "synth",
        "seed": args.seed,
        "spec": spec,
        "output": args.output.display().to_string(),
        "n_rows": data.n_rows(),
        "n_outliers": labels
            .iter()
            .filter(|l| l.as_str() == "outlier")
            .count(),
    });
    write_sidecar(&args.output, &sidecar)?;

    println!("rows outliers output");
    println!(
        "{} {} {}",
        data.n_rows(),
        labels.iter().filter(|l| l.as_str() == "outlier").count(),
        args.output.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    init_threads(args.threads);
    let started = Instant::now();
    let (raw, labels) = load_labeled_csv(&args.input, &args.label_column)?;
    let data = if args.standardize {
        standardize(&raw)?.0
    } else {
        raw
    };
    let truth: Vec<bool> = labels.iter().map(|l| is_positive_label(l)).collect();

    let points: Vec<SweepPoint> = match (&args.epsilon_grid, args.method) {
        (Some(grid), MethodArg::Swad) => {
            let base = SwadParams {
                t: args.t,
                epsilon: 0.0,
                n_votes: args.n_votes,
                p_threshold: args.p,
                n_projections: args.projections,
                seed: args.seed,
            };
            epsilon_sweep(&data, &truth, grid, &base)?
        }
        (Some(grid), _) => {
            // One filter run per grid value; nested flag counts follow from
            // threshold monotonicity.
            grid.iter()
                .map(|&threshold| bench_point(&data, &truth, &args, threshold))
                .collect::<Result<_>>()?
        }
        (None, _) => {
            let threshold = match args.method {
                MethodArg::Fead => required_threshold(args.eta, "eta", args.method)?,
                _ => required_threshold(args.epsilon, "epsilon", args.method)?,
            };
            vec![bench_point(&data, &truth, &args, threshold)?]
        }
    };
    let wall_time_s = started.elapsed().as_secs_f64();

    if let Some(path) = &args.output {
        let mut out = String::from("threshold,flagged,accuracy,precision\n");
        for p in &points {
            out.push_str(&format!(
                "{},{},{},{}\n",
                p.epsilon,
                p.n_flagged,
                p.accuracy,
                p.precision.map_or(String::new(), |v| v.to_string())
            ));
        }
        std::fs::write(path, out).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let sidecar = serde_json::json!({
            "schema": 1,
            "command": "bench",
            "method": args.method.to_string(),
            "input": args.input.display().to_string(),
            "label_column": args.label_column,
            "t": args.t,
            "epsilon": args.epsilon,
            "eta": args.eta,
            "epsilon_grid": args.epsilon_grid,
            "n_votes": args.n_votes,
            "p": args.p,
            "projections": args.projections,
            "k": args.k,
            "s": args.s,
            "seed": args.seed,
            "standardize": args.standardize,
            "threads": args.threads,
            "output": path.display().to_string(),
            "wall_time_s": wall_time_s,
        });
        write_sidecar(path, &sidecar)?;
    }

    println!("method threshold flagged accuracy precision seconds");
    for p in &points {
        println!(
            "{} {} {} {:.6} {} {:.3}",
            args.method,
            p.epsilon,
            p.n_flagged,
            p.accuracy,
            p.precision
                .map_or("none".to_string(), |v| format!("{v:.6}")),
            wall_time_s
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn bench_point(
    data: &Dataset,
    truth: &[bool],
    args: &BenchArgs,
    threshold: f64,
) -> Result<SweepPoint> {
    let report = match args.method {
        MethodArg::Swad => swad_filter(
            data,
            &SwadParams {
                t: args.t,
                epsilon: threshold,
                n_votes: args.n_votes,
                p_threshold: args.p,
                n_projections: args.projections,
                seed: args.seed,
            },
        )?,
        MethodArg::Sswad => sswad_filter(
            data,
            &SswadParams {
                base: SwadParams {
                    t: args.t,
                    epsilon: threshold,
                    n_votes: args.n_votes,
                    p_threshold: args.p,
                    n_projections: args.projections,
                    seed: args.seed,
                },
                k_clusters: args.k,
                s_splits: args.s,
            },
        )?,
        MethodArg::Fead => fead_filter(
            data,
            &FeadParams {
                t: args.t,
                eta: threshold,
                n_votes: args.n_votes,
                p_threshold: args.p,
                seed: args.seed,
            },
        )?,
    };
    let counts = swad_core::confusion(&report.is_outlier, truth)?;
    Ok(SweepPoint {
        epsilon: threshold,
        n_flagged: report.n_flagged(),
        accuracy: counts.accuracy()?,
        precision: counts.precision()?,
    })
}

fn is_positive_label(label: &str) -> bool {
    let l = label.trim();
    l.eq_ignore_ascii_case("outlier") || l == "1" || l.eq_ignore_ascii_case("true")
}

fn write_sidecar(output: &Path, sidecar: &serde_json::Value) -> Result<()> {
    let mut path = output.as_os_str().to_os_string();
    path.push(".json");
    let path = PathBuf::from(path);
    let body = format!(
        "{}\n",
        serde_json::to_string_pretty(sidecar).expect("valid json")
    );
    std::fs::write(&path, body).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}
