//! Command-line front end: `validate`, `phi`, `tailprob`, `simulate`,
//! `limit-sample`, `density` and `verify`.
//!
//! Exit codes: 0 success, 1 threshold failure, 2 usage or config error,
//! 3 numerical failure (root bracket, convergence, sampling budget).

mod commands;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_THRESHOLD: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "condlim", version, about = "Conditional limit laws of polar-represented pairs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Grid checks of the model assumptions.
    Validate(RunArgs),
    /// Normalizers psi, phi_-, phi_+, phi* on an x grid.
    Phi(RunArgs),
    /// P{X > x} by Monte Carlo, quadrature or first-order asymptotic.
    Tailprob(RunArgs),
    /// Conditional draws of (R, T) given X > x, with normalized coordinates.
    Simulate(RunArgs),
    /// Exact draws from the limit law (or a corollary pushforward).
    LimitSample(RunArgs),
    /// Limit density on a grid, with its 2-D normalization.
    Density(RunArgs),
    /// Convergence report along an x grid, checked against thresholds.
    Verify(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Mc,
    Quad,
    Asym,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Model configuration file (`key = value` lines).
    #[arg(long)]
    pub config: PathBuf,
    /// Seed; mandatory for stochastic commands.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Single threshold x.
    #[arg(long)]
    pub x: Option<f64>,
    /// Comma-separated thresholds.
    #[arg(long, value_delimiter = ',')]
    pub x_grid: Option<Vec<f64>>,
    /// Sample size (accepted draws, proposals for `tailprob --method mc`, grid
    /// points per axis for `density`).
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Corollary case: fs, delta_gt_kappa, ratio_c, seifert, theta_n.
    #[arg(long)]
    pub case: Option<String>,
    /// right_sided (X > x, T > t0) or unrestricted (X > x).
    #[arg(long)]
    pub condition: Option<String>,
    /// Worker threads for Monte Carlo batches; does not change the output.
    #[arg(long)]
    pub workers: Option<usize>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match commands::dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
