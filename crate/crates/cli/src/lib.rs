//! Command-line runner for the `nevorder` pipeline.
//!
//! Three commands write plot-ready artifacts: `order` (growth series and order
//! fit), `hopf` (region report for the Hopf surface) and `checks` (identity and
//! inequality suites). Every output file embeds the resolved configuration and
//! the crate version.

mod checks;
mod config;
mod hopf;
mod order;
mod output;

use std::ffi::OsString;
use std::fmt;

use clap::{Parser, Subcommand};

pub use config::{ChecksArgs, HopfArgs, OrderArgs};

pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID_CONFIG: i32 = 2;
pub const EXIT_SAMPLER_INVALID: i32 = 3;
pub const EXIT_COVERAGE: i32 = 4;
pub const THREADS_ENV: &str = "NEVORDER_THREADS";

#[derive(Parser, Debug)]
#[command(name = "nevorder", version, about = "Growth orders of holomorphic maps by sphere quadrature")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Order function and growth-order fit for a map/metric pair.
    Order(OrderArgs),
    /// Region contributions, I_r and J_r for the Hopf surface.
    Hopf(HopfArgs),
    /// Volume, arithmetic, invariance and sphere-mean suites.
    Checks(ChecksArgs),
}

/// A failed run with its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INVALID_CONFIG,
            message: message.into(),
        }
    }

    pub fn check(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_CHECK_FAILED,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<nevorder::Error> for Failure {
    fn from(e: nevorder::Error) -> Self {
        use nevorder::Error as E;
        let code = match e.root() {
            E::InvalidInput(_) | E::Domain { .. } => EXIT_INVALID_CONFIG,
            E::SamplerInvalid(_) => EXIT_SAMPLER_INVALID,
            E::CoverageViolation { .. } => EXIT_COVERAGE,
            _ => EXIT_CHECK_FAILED,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::check(format!("{e:#}"))
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::config(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
    // A second initialisation in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Order(args) => order::run(args),
        Command::Hopf(args) => hopf::run(args),
        Command::Checks(args) => checks::run(args),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID_CONFIG } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {f}");
            f.code
        }
    }
}
