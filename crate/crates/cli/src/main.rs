//! `asrs`: score, group and audit a classifier by embedding instability.
//!
//! Exit codes: 0 success, 2 input or validation error, 3 leakage guard.

use std::path::PathBuf;
use std::process::ExitCode;

use asrs_core::evaluation::{EvalConfig, DEFAULT_REPS, DEFAULT_THRESHOLD};
use asrs_core::metadata::current_timestamp;
use asrs_core::pipeline::{run_group, run_report, run_score, run_thresholds, Invocation, ReportPaths};
use asrs_core::report::ReportFormat;
use asrs_core::synth::{generate, SynthConfig};
use asrs_core::{Error, GroupLabel};
use clap::{Parser, Subcommand};

const THREADS_ENV: &str = "ASRS_THREADS";

#[derive(Parser)]
#[command(name = "asrs", version, about = "Rotation-instability scoring and stratified reliability reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every sample in an embedding file.
    Score {
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit quartile thresholds on validation scores.
    Thresholds {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Assign test scores to G1..G4 with previously fitted thresholds.
    Group {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        thresholds: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-group metrics, confidence and demographics.
    Report {
        #[arg(long)]
        groups: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        cohort: Option<PathBuf>,
        /// Comma-separated task names; all tasks when omitted.
        #[arg(long, value_delimiter = ',')]
        tasks: Option<Vec<String>>,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long, default_value = "G4")]
        resample_anchor: GroupLabel,
        #[arg(long, default_value_t = DEFAULT_REPS)]
        reps: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "json")]
        format: ReportFormat,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a synthetic cohort with a known instability/miss link.
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
        /// JSON file with generator settings; flags below override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        n_val: Option<usize>,
        #[arg(long)]
        n_test: Option<usize>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        prevalence: Option<f64>,
        /// Four comma-separated miss rates, G1-like quartile first.
        #[arg(long, value_delimiter = ',')]
        miss_rates: Option<Vec<f64>>,
        #[arg(long)]
        confidence_inflation: Option<f64>,
        #[arg(long)]
        false_positive_rate: Option<f64>,
        #[arg(long)]
        view_noise: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        tasks: Option<Vec<String>>,
    },
}

fn configure_threads() -> Result<(), Error> {
    let n = match std::env::var(THREADS_ENV) {
        Ok(v) if v.trim().is_empty() => 0,
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::InvalidConfig(format!("{THREADS_ENV}={v:?} is not a non-negative integer")))?,
        Err(_) => 0,
    };
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidConfig(format!("cannot start {n} worker threads: {e}")))?;
    }
    Ok(())
}

fn synth_config(
    config: Option<PathBuf>,
    overrides: impl FnOnce(&mut SynthConfig) -> Result<(), Error>,
) -> Result<SynthConfig, Error> {
    let mut cfg = match config {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
            serde_json::from_str(&text).map_err(|e| Error::from(e).in_file(&path))?
        }
        None => SynthConfig::default(),
    };
    overrides(&mut cfg)?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Error> {
    configure_threads()?;
    let inv = Invocation {
        command_line: std::iter::once("asrs".to_string())
            .chain(std::env::args().skip(1))
            .collect(),
        timestamp: current_timestamp()?,
    };
    match cli.command {
        Command::Score { embeddings, out } => run_score(&embeddings, &out, &inv),
        Command::Thresholds { scores, out } => run_thresholds(&scores, &out, &inv),
        Command::Group { scores, thresholds, out } => run_group(&scores, &thresholds, &out, &inv),
        Command::Report {
            groups,
            predictions,
            labels,
            cohort,
            tasks,
            threshold,
            resample_anchor,
            reps,
            seed,
            format,
            out,
        } => {
            let cfg = EvalConfig {
                threshold,
                anchor: resample_anchor,
                reps,
                seed,
            };
            let paths = ReportPaths {
                groups: &groups,
                predictions: &predictions,
                labels: &labels,
                cohort: cohort.as_deref(),
            };
            run_report(&paths, tasks.as_deref(), &cfg, format, &out, &inv)
        }
        Command::Synth {
            out_dir,
            config,
            seed,
            n_val,
            n_test,
            dim,
            prevalence,
            miss_rates,
            confidence_inflation,
            false_positive_rate,
            view_noise,
            tasks,
        } => {
            let cfg = synth_config(config, |c| {
                c.seed = seed.unwrap_or(c.seed);
                c.n_val = n_val.unwrap_or(c.n_val);
                c.n_test = n_test.unwrap_or(c.n_test);
                c.dim = dim.unwrap_or(c.dim);
                c.prevalence = prevalence.unwrap_or(c.prevalence);
                c.confidence_inflation = confidence_inflation.unwrap_or(c.confidence_inflation);
                c.false_positive_rate = false_positive_rate.unwrap_or(c.false_positive_rate);
                c.view_noise = view_noise.unwrap_or(c.view_noise);
                if let Some(t) = tasks {
                    c.tasks = t;
                }
                if let Some(m) = miss_rates {
                    c.miss_rate_by_quartile = m
                        .try_into()
                        .map_err(|_| Error::InvalidConfig("--miss-rates takes exactly four values".into()))?;
                }
                Ok(())
            })?;
            generate(&cfg, &out_dir).map(|_| ())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("asrs: error: {e}");
            ExitCode::from(match e {
                Error::Leakage { .. } => 3,
                _ => 2,
            })
        }
    }
}
