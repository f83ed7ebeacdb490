//! wavedet: detect weak pulses by wavelet features, a bank of shifted
//! linear SVMs, and a polynomial integration SVM.
//!
//! The pipeline runs in stages, one subcommand each:
//!
//! ```text
//! wavedet gen    # synthesize the labeled dataset
//! wavedet train  # shift bank + integrators + threshold calibration
//! wavedet eval   # curves.csv, corr.csv, rates.json, complexity.txt
//! wavedet corr   # only the margin-correlation study
//! ```
//!
//! All knobs live in one JSON config (`--config`, overridable with
//! `--set key=value`); every stage is deterministic given the config.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use wavedet::error::WavedetError;

#[derive(Parser)]
#[command(name = "wavedet", version, about = "wavelet + SVM pulse detection pipeline")]
struct Cli {
    /// JSON experiment config; defaults apply for all missing fields.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override one config field by dotted path, e.g. --set counts.pulse_bank=500
    /// or --set shifts=[0,11,23]. Repeatable; applied after the file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Cap the evaluation worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the labeled dataset files (dataset.bin + dataset.json).
    Gen {
        /// Overwrite existing dataset files.
        #[arg(long)]
        force: bool,
    },
    /// Train the shift bank and both integrators, calibrate thresholds.
    Train {
        /// Overwrite existing pipeline bundles.
        #[arg(long)]
        force: bool,
    },
    /// Emit curves.csv, corr.csv, rates.json and complexity.txt.
    Eval,
    /// Run only the margin-correlation study (corr.csv).
    Corr,
}

fn exit_code(err: &WavedetError) -> i32 {
    match err {
        WavedetError::Parameter(_) | WavedetError::Config(_) | WavedetError::Calibration { .. } => 2,
        WavedetError::Training(_) | WavedetError::Data(_) | WavedetError::Io(_) => 3,
        WavedetError::Invariant(_) => 4,
    }
}

fn run(cli: Cli) -> wavedet::error::Result<()> {
    let cfg = config::load(cli.config.as_deref(), &cli.set)?;
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(WavedetError::Config("--workers must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| WavedetError::Config(format!("worker pool: {e}")))?;
    }
    match cli.command {
        Command::Gen { force } => commands::cmd_gen(&cfg, force),
        Command::Train { force } => commands::cmd_train(&cfg, force),
        Command::Eval => commands::cmd_eval(&cfg),
        Command::Corr => commands::cmd_corr(&cfg),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}
