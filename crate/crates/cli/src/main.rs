//! `spectral`: run the estimators, diagnostics, sweeps, phase grids and
//! reproduction checks from a JSON experiment config.
//!
//! Exit codes: 0 success, 1 invalid input, 2 estimator degeneracy,
//! 3 failed check.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "spectral", version, about = "Subspace line-spectral estimation: MUSIC, ESPRIT, bounds and Monte-Carlo experiments")]
pub struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Overrides the config's root seed.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,

    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "PATH", default_value = ".")]
    pub out: PathBuf,

    /// Worker threads for Monte-Carlo runs.
    #[arg(long, global = true, env = "SPECTRAL_THREADS", value_name = "N")]
    pub threads: Option<usize>,

    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One MUSIC trial: writes result.json and the estimated NSC profile.
    Music {
        /// Trial index to draw.
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
    /// One ESPRIT trial: writes result.json.
    Esprit {
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
    /// Conditioning, bound shapes and the Cramer-Rao bound for the config.
    Bounds,
    /// Runs the config's sweep: writes sweep.csv and fit.csv.
    Sweep,
    /// Runs the config's phase grid: writes phase.csv and crossings.csv.
    Phase,
    /// Runs a reproduction check suite; exits 3 if any check fails.
    Check {
        /// Suite: exactness, slopes-lambda2, slopes-lambda3, sigma-law, crb, oracles, phase, all.
        #[arg(long, alias = "check-suite", value_name = "NAME", default_value = "all")]
        suite: String,
        /// Trials per Monte-Carlo point, replacing each suite's default.
        #[arg(long, value_name = "N")]
        trials: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Help and version requests are not errors; usage errors exit 1.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    match commands::dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
