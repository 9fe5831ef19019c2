//! Command-line front end for the `crda` crate.
//!
//! Subcommands: `simulate` writes one synthetic trial to disk, `cv` tunes the
//! shrinkage weight and sparsity level, `train` fits and serializes a model,
//! `predict` classifies new samples, and `bench` reproduces the Monte Carlo
//! benchmark tables.

pub mod args;
pub mod bench;
pub mod commands;
pub mod echo;

use std::process::ExitCode;

use clap::Parser;
use crda::CrdaError;

pub use args::{Cli, Command};

/// Errors surfaced to the user, split by exit code class: flag problems exit
/// with 2, data problems with 3, numeric failures with 4.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Data(#[from] CrdaError),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(CrdaError::Io(e))
    }
}

pub fn exit_code(err: &CliError) -> u8 {
    match err {
        CliError::Usage(_) => 2,
        CliError::Data(e) if e.is_numeric() => 4,
        CliError::Data(_) => 3,
    }
}

pub fn run() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// Runs an already-parsed command line; separate from [`run`] so tests can
/// drive subcommands without spawning the binary.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    configure_workers(cli.workers)?;
    match &cli.command {
        Command::Simulate(a) => commands::cmd_simulate(a),
        Command::Cv(a) => commands::cmd_cv(a),
        Command::Train(a) => commands::cmd_train(a),
        Command::Predict(a) => commands::cmd_predict(a),
        Command::Bench(a) => bench::cmd_bench(a),
    }
}

/// Sizes the global worker pool from the flag, the `CRDA_WORKERS` variable,
/// or the core count, in that order.
pub fn configure_workers(requested: Option<usize>) -> Result<usize, CliError> {
    let workers = match requested {
        Some(n) => n,
        None => match std::env::var("CRDA_WORKERS") {
            Ok(raw) => raw.trim().parse().map_err(|_| {
                CliError::Usage(format!("CRDA_WORKERS must be an integer, got {raw:?}"))
            })?,
            Err(_) => std::thread::available_parallelism()
                .map(|v| v.get())
                .unwrap_or(1),
        },
    };
    if workers == 0 {
        return Err(CliError::Usage("worker count must be at least 1".into()));
    }
    // A repeat call keeps the first pool; that only happens inside tests.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global();
    Ok(workers)
}
