//! `mipt`: run hybrid-circuit ensembles, sweep `(L, p)` grids, fit data
//! collapses, and self-validate the simulators.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.

mod collapse;
mod config;
mod run;
mod sweep;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "mipt", version, about = "Hybrid unitary-projective circuit lab")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "MIPT_WORKERS")]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, env = "MIPT_OUT_DIR", default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one ensemble and write its time series and a run manifest.
    Run(run::RunArgs),
    /// Run a grid of (L, p) ensembles; resumable.
    Sweep(sweep::SweepArgs),
    /// Fit a static data collapse to a sweep CSV.
    Collapse(collapse::CollapseArgs),
    /// Cross-check the simulators against each other and known statistics.
    Validate(validate::ValidateArgs),
}

/// Bad input from the user: exit code 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Wraps core errors, classifying configuration problems as usage errors.
pub fn core_err(e: mipt_core::Error) -> anyhow::Error {
    match e {
        mipt_core::Error::InvalidConfig(_) | mipt_core::Error::Capacity(_) => UsageError(e.to_string()).into(),
        other => other.into(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} workers: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Run(a) => run::run(a, &cli.out),
        Command::Sweep(a) => sweep::run(a, &cli.out),
        Command::Collapse(a) => collapse::run(a, &cli.out),
        Command::Validate(a) => validate::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
