//! Command-line front end: fringe scans, gain sweeps, Monte Carlo counts and
//! calibration fits driven by a JSON run configuration.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod svg;
pub mod table;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use error::{CliError, CliResult};

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));
pub const THREADS_ENV: &str = "SQF_THREADS";

#[derive(Debug, Parser)]
#[command(name = "subrayleigh", version = VERSION, about = "Sub-Rayleigh fringe simulation and calibration")]
pub struct Cli {
    /// Suppress informational messages on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scan the compensator phase and report visibility and period.
    Fringe(RunArgs),
    /// Visibility or phase-averaged rate as a function of gain.
    GainSweep(SweepArgs),
    /// Fit a fringe or a gain sweep read from CSV.
    Fit(FitArgs),
    /// Pulse-by-pulse detector simulation.
    Montecarlo(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Data file; overrides the config's output path.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    Visibility,
    Rate,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Comma-separated gains.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub gains: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Quantity::Visibility)]
    pub quantity: Quantity,
    /// Order of the same-detector coincidence (2 or 3).
    #[arg(long, default_value_t = 2)]
    pub order: u8,
    /// Gain rescale: the physics is evaluated at `alpha * g`.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitKind {
    Fringe,
    #[value(alias = "visibility_gain")]
    VisibilityGain,
    #[value(alias = "rate_gain")]
    RateGain,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[arg(long, value_enum)]
    pub kind: FitKind,
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    /// Rate-law order for rate fits.
    #[arg(long, default_value_t = 2)]
    pub order: u8,
    /// Use the `weight` column, or `1/stderr²` when only `stderr` is present.
    #[arg(long)]
    pub weighted: bool,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub svg: Option<PathBuf>,
}

/// Result of a successful command: the stdout JSON line and the exit code.
#[derive(Debug)]
pub struct Outcome {
    pub json: serde_json::Value,
    pub exit: u8,
}

/// Applies the `SQF_THREADS` cap, if set.
pub fn configure_threads() -> CliResult<()> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
            subrayleigh::par::init_thread_pool(n).map_err(|e| CliError::Config(e.to_string()))
        }
        Err(_) => Ok(()),
    }
}

pub fn execute(cli: &Cli) -> CliResult<Outcome> {
    configure_threads()?;
    match &cli.command {
        Command::Fringe(a) => commands::fringe(a, cli.quiet),
        Command::GainSweep(a) => commands::gain_sweep(a, cli.quiet),
        Command::Fit(a) => commands::fit(a, cli.quiet),
        Command::Montecarlo(a) => commands::montecarlo(a, cli.quiet),
    }
}
