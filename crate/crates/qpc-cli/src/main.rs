//! `qpc` command-line tool: evaluate classifiers over MNIST-style IDX
//! datasets, inspect per-example class distributions, benchmark the
//! simulator's scaling, and validate IDX files.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use qpc_cli::experiment::{ClassifierSpec, ExperimentSpec, QpcMode, SubsetSpec};
use qpc_cli::timing::{rows_to_csv, SweepGrid};
use qpc_cli::{distribution_table, run_experiment, CliError};

#[derive(Parser)]
#[command(
    name = "qpc",
    about = "Quantum Hamming-distance pattern classification over IDX datasets",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run configured classifiers over a dataset and write a report.
    Evaluate(EvaluateArgs),
    /// Print the class distribution of a single test example.
    Distribution(DistributionArgs),
    /// Measure simulator wall time over a synthetic (N, n, T) grid.
    Timing(TimingArgs),
    /// Validate IDX files and print their shapes.
    ParseCheck(ParseCheckArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum RetrievalFlag {
    /// Sampled class-register measurements.
    Class,
    /// Sampled neighbour draws.
    Neighbour,
}

#[derive(Args)]
struct DatasetArgs {
    /// JSON experiment spec; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    train_images: Option<PathBuf>,
    #[arg(long)]
    train_labels: Option<PathBuf>,
    #[arg(long)]
    test_images: Option<PathBuf>,
    #[arg(long)]
    test_labels: Option<PathBuf>,
    /// Training subset size.
    #[arg(long)]
    n_train: Option<usize>,
    /// Test subset size.
    #[arg(long)]
    n_test: Option<usize>,
    /// Subset selection: `first` or `seed:<u64>`.
    #[arg(long)]
    subset: Option<String>,
    /// Binarization threshold (pixel >= threshold becomes 1).
    #[arg(long)]
    threshold: Option<u8>,
    /// Base seed for per-example RNG derivation.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct QpcFlags {
    /// Phase-slope scale of the quantum classifier.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Measurement repetitions; 0 selects the analytic mode.
    #[arg(long)]
    shots: Option<u32>,
    /// Retrieval version for the default quantum classifier.
    #[arg(long, value_enum)]
    version: Option<RetrievalFlag>,
    /// Neighbour draws for the neighbour retrieval version.
    #[arg(long)]
    k: Option<u32>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    /// Classifier spec, repeatable: qpc[:key=value,...], knn:k=<n>,
    /// weighted-knn:k=<n>[,weight=...], centroid. When omitted, one
    /// quantum classifier is built from --epsilon/--shots/--version/--k.
    #[arg(long = "classifier")]
    classifiers: Vec<String>,
    #[command(flatten)]
    qpc: QpcFlags,
    /// Report destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
    /// Include wall-clock timings in the report (breaks byte-for-byte
    /// reproducibility across runs).
    #[arg(long)]
    emit_timings: bool,
}

#[derive(Args)]
struct DistributionArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    /// Index into the test subset.
    #[arg(long)]
    example_index: usize,
    #[command(flatten)]
    qpc: QpcFlags,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; human-readable text when omitted.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Args)]
struct TimingArgs {
    /// Comma-separated training-set sizes.
    #[arg(long, default_value = "1000,2000")]
    sweep_train: String,
    /// Comma-separated feature counts.
    #[arg(long, default_value = "256,512")]
    sweep_features: String,
    /// Comma-separated shot counts.
    #[arg(long, default_value = "64,128")]
    sweep_shots: String,
    /// Measurements per grid point; the fastest is reported.
    #[arg(long, default_value = "3")]
    repeats: usize,
    #[arg(long, default_value = "1.0")]
    epsilon: f64,
    #[arg(long, default_value = "0")]
    seed: u64,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ParseCheckArgs {
    /// IDX image file (plain or gzipped).
    #[arg(long)]
    images: Option<PathBuf>,
    /// IDX label file (plain or gzipped).
    #[arg(long)]
    labels: Option<PathBuf>,
}

fn flag_path(value: &Option<PathBuf>) -> Option<String> {
    value.as_ref().map(|p| p.display().to_string())
}

/// Merge the optional config file with flag overrides into a full spec.
fn resolve_spec(
    dataset: &DatasetArgs,
    classifiers: &[String],
    qpc_flags: &QpcFlags,
) -> Result<ExperimentSpec, CliError> {
    let mut base: Option<ExperimentSpec> = match &dataset.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            Some(
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))?,
            )
        }
        None => None,
    };

    let mut parsed: Vec<ClassifierSpec> = classifiers
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_, _>>()?;
    if parsed.is_empty() && base.is_none() {
        parsed.push(default_qpc_from_flags(qpc_flags));
    }

    let require = |field: Option<String>, name: &str| {
        field.ok_or_else(|| CliError::Usage(format!("missing --{name} (or provide --config)")))
    };

    let spec = match base.take() {
        Some(mut spec) => {
            if let Some(p) = flag_path(&dataset.train_images) {
                spec.train_images = p;
            }
            if let Some(p) = flag_path(&dataset.train_labels) {
                spec.train_labels = p;
            }
            if let Some(p) = flag_path(&dataset.test_images) {
                spec.test_images = p;
            }
            if let Some(p) = flag_path(&dataset.test_labels) {
                spec.test_labels = p;
            }
            if !parsed.is_empty() {
                spec.classifiers = parsed;
            }
            spec
        }
        None => ExperimentSpec {
            train_images: require(flag_path(&dataset.train_images), "train-images")?,
            train_labels: require(flag_path(&dataset.train_labels), "train-labels")?,
            test_images: require(flag_path(&dataset.test_images), "test-images")?,
            test_labels: require(flag_path(&dataset.test_labels), "test-labels")?,
            n_train: 400,
            n_test: 100,
            subset: SubsetSpec::First,
            threshold: 128,
            classifiers: parsed,
            base_seed: 0,
        },
    };

    let mut spec = spec;
    if let Some(n) = dataset.n_train {
        spec.n_train = n;
    }
    if let Some(n) = dataset.n_test {
        spec.n_test = n;
    }
    if let Some(subset) = &dataset.subset {
        spec.subset = subset.parse()?;
    }
    if let Some(threshold) = dataset.threshold {
        spec.threshold = threshold;
    }
    if let Some(seed) = dataset.seed {
        spec.base_seed = seed;
    }
    spec.validate()?;
    Ok(spec)
}

fn default_qpc_from_flags(flags: &QpcFlags) -> ClassifierSpec {
    let shots = flags.shots.unwrap_or(qpc::QpcConfig::default().shots);
    let mode = if shots == 0 {
        QpcMode::Analytic
    } else {
        match flags.version.unwrap_or(RetrievalFlag::Class) {
            RetrievalFlag::Class => QpcMode::Class,
            RetrievalFlag::Neighbour => QpcMode::Neighbour,
        }
    };
    ClassifierSpec::Qpc {
        mode,
        epsilon: flags.epsilon.unwrap_or(1.0),
        shots,
        neighbour_samples: flags.k.unwrap_or(qpc::QpcConfig::default().neighbour_samples),
    }
}

fn write_output(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn parse_list<T: std::str::FromStr>(list: &str, name: &str) -> Result<Vec<T>, CliError> {
    list.split(',')
        .filter(|part| !part.trim().is_empty())
        .map(|part| {
            part.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad --{name} entry {part:?}")))
        })
        .collect()
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Evaluate(args) => {
            let spec = resolve_spec(&args.dataset, &args.classifiers, &args.qpc)?;
            let report = run_experiment(&spec, args.emit_timings)?;
            for line in report.summary_lines() {
                eprintln!("{line}");
            }
            let content = match args.format {
                OutputFormat::Json => report.to_json()?,
                OutputFormat::Csv => report.to_csv()?,
            };
            write_output(&args.out, &content)
        }
        Command::Distribution(args) => {
            let spec = resolve_spec(&args.dataset, &[], &args.qpc)?;
            let table = distribution_table(&spec, args.example_index)?;
            let content = match args.format {
                None => table.to_text(),
                Some(OutputFormat::Csv) => table.to_csv()?,
                Some(OutputFormat::Json) => {
                    return Err(CliError::Usage(
                        "distribution supports text (default) or csv output".into(),
                    ))
                }
            };
            write_output(&args.out, &content)
        }
        Command::Timing(args) => {
            let grid = SweepGrid {
                train_sizes: parse_list(&args.sweep_train, "sweep-train")?,
                feature_counts: parse_list(&args.sweep_features, "sweep-features")?,
                shot_counts: parse_list(&args.sweep_shots, "sweep-shots")?,
                repeats: args.repeats,
                epsilon: args.epsilon,
                seed: args.seed,
            };
            let rows = qpc_cli::run_sweep(&grid)?;
            write_output(&args.out, &rows_to_csv(&rows)?)
        }
        Command::ParseCheck(args) => {
            if args.images.is_none() && args.labels.is_none() {
                return Err(CliError::Usage("provide --images and/or --labels".into()));
            }
            if let Some(path) = &args.images {
                let bytes = qpc::mnist::read_maybe_gzip(path)
                    .map_err(|e| CliError::from_data_source(e, &path.display().to_string()))?;
                let images = qpc::mnist::parse_idx_images(&bytes)
                    .map_err(|e| CliError::from_data_source(e, &path.display().to_string()))?;
                let geometry = images
                    .first()
                    .map(|im| format!("{}x{}", im.height(), im.width()))
                    .unwrap_or_else(|| "empty".into());
                println!("{}: OK, {} images of {}", path.display(), images.len(), geometry);
            }
            if let Some(path) = &args.labels {
                let bytes = qpc::mnist::read_maybe_gzip(path)
                    .map_err(|e| CliError::from_data_source(e, &path.display().to_string()))?;
                let labels = qpc::mnist::parse_idx_labels(&bytes)
                    .map_err(|e| CliError::from_data_source(e, &path.display().to_string()))?;
                println!("{}: OK, {} labels", path.display(), labels.len());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
