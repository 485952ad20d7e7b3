//! Command-line driver: Monte Carlo experiments, tail-bound tables and one-shot transforms.
//!
//! Exit codes: 0 on success, 1 for an infeasible configuration or bad input,
//! 2 for I/O failures.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gabor_recover::experiments::{emit_results, run_experiment, ExperimentConfig, Mode};
use gabor_recover::{Error, Signal2D, TransformKind};

const THREADS_VAR: &str = "GABOR_RECOVER_THREADS";

#[derive(Parser)]
#[command(
    name = "gabor-recover",
    version,
    about = "Erasure recovery experiments for row-wise Gabor transforms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Frequency of M_max < N/(2 E_max) against its exact probability.
    MmaxSweep(ExperimentArgs),
    /// Frequency of M_min < N/(2 E_max) against its exact probability.
    MminSweep(ExperimentArgs),
    /// Row-by-row L1 recovery of random row-sparse signals.
    RowRecovery(ExperimentArgs),
    /// Row recovery followed by column recovery on the two-stage witness signals.
    TwoStage(ExperimentArgs),
    /// Exact tails and the geometric-series bound, one CSV row per N.
    TailBounds(ExperimentArgs),
    /// Apply a transform to a signal stored as JSON.
    Transform(TransformArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long = "e-max")]
    e_max: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed; trial i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated row lengths to sweep.
    #[arg(long, value_delimiter = ',')]
    sweep: Option<Vec<usize>>,
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory [default: results/<subcommand>].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TransformArgs {
    /// Signal JSON: {"n", "t", "re", "im"} in row-major order.
    #[arg(long)]
    input: PathBuf,
    /// fourier2d, gabor-row or gabor-col.
    #[arg(long)]
    kind: TransformKind,
    #[arg(long)]
    inverse: bool,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_io() {
            Failure::Io(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn build_config(mode: Mode, args: ExperimentArgs) -> Result<ExperimentConfig, Failure> {
    let mut config = match &args.config {
        Some(path) => {
            let text = read(path)?;
            ExperimentConfig::from_json(&text)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
        }
        None => {
            let missing: Vec<&str> = [
                ("--n", args.n.is_none()),
                ("--t", args.t.is_none()),
                ("--theta", args.theta.is_none()),
                ("--e-max", args.e_max.is_none()),
            ]
            .into_iter()
            .filter_map(|(flag, absent)| absent.then_some(flag))
            .collect();
            if !missing.is_empty() {
                return Err(Failure::Config(format!(
                    "without --config these flags are required: {}",
                    missing.join(", ")
                )));
            }
            ExperimentConfig::new(mode, 0, 0, 0.0, 0, 1000)
        }
    };
    config.mode = mode;
    if let Some(v) = args.n {
        config.n = v;
    }
    if let Some(v) = args.t {
        config.t = v;
    }
    if let Some(v) = args.theta {
        config.theta = v;
    }
    if let Some(v) = args.e_max {
        config.e_max_target = v;
    }
    if let Some(v) = args.trials {
        config.trials = v;
    }
    if let Some(v) = args.seed {
        config.base_seed = v;
    }
    if let Some(v) = args.sweep {
        config.sweep = Some(v);
    }
    if let Some(v) = args.tol {
        config.tol = v;
    }
    config.validate()?;
    Ok(config)
}

fn run_mode(mode: Mode, args: ExperimentArgs) -> Result<(), Failure> {
    // Kept out of the config so the summary does not depend on where it is written.
    let out = args.out.clone();
    let config = build_config(mode, args)?;
    let dir = out
        .or_else(|| config.output_path.clone().map(PathBuf::from))
        .unwrap_or_else(|| Path::new("results").join(mode.name()));
    let outcome = run_experiment(&config)?;
    for p in &outcome.summary.points {
        println!(
            "n={:<6} successes={}/{} empirical={:.4} wilson95=[{:.4}, {:.4}] closed_form={:.4} ({})",
            p.n,
            p.successes,
            p.trials,
            p.empirical,
            p.wilson95[0],
            p.wilson95[1],
            p.closed_form,
            p.closed_form_kind
        );
    }
    for r in &outcome.summary.tail_bounds {
        let bound = r
            .lemma_bound
            .map_or_else(|| "-".to_string(), |b| format!("{b:.3e}"));
        println!(
            "n={:<6} exact_tail={:.3e} bound={bound} p_mmax_below={:.6} p_mmin_below={:.3e}",
            r.n, r.exact_tail, r.p_mmax_below, r.p_mmin_below
        );
    }
    for path in emit_results(&outcome, &dir)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run_transform(args: TransformArgs) -> Result<(), Failure> {
    let text = read(&args.input)?;
    let signal = Signal2D::from_json(&text)
        .map_err(|e| Failure::Config(format!("{}: {e}", args.input.display())))?;
    let result = if args.inverse {
        args.kind.inverse(&signal)
    } else {
        args.kind.forward(&signal)
    };
    let mut json = result.to_json()?;
    json.push('\n');
    match args.out {
        Some(path) => {
            fs::write(&path, json).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::Config(format!(
            "{THREADS_VAR} must be a positive integer, got {raw:?}"
        ))
    })?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Config(e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = configure_threads().and_then(|()| match cli.command {
        Command::MmaxSweep(a) => run_mode(Mode::MmaxSweep, a),
        Command::MminSweep(a) => run_mode(Mode::MminSweep, a),
        Command::RowRecovery(a) => run_mode(Mode::RowRecovery, a),
        Command::TwoStage(a) => run_mode(Mode::TwoStage, a),
        Command::TailBounds(a) => run_mode(Mode::TailBounds, a),
        Command::Transform(a) => run_transform(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
