//! Flags, the JSON config-file mirror and their merge into resolved settings.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerChoice {
    /// Region-stratified for the Hopf pair, uniform otherwise.
    Auto,
    Uniform,
    Stratified,
}

/// Every setting any command reads. Config files use these keys.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub map: Option<String>,
    pub metric: Option<String>,
    pub seed: Option<u64>,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub shells_per_decade: Option<usize>,
    pub samples: Option<usize>,
    pub epsilon: Option<f64>,
    pub window_fraction: Option<f64>,
    pub sampler: Option<SamplerChoice>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub expect_order: Option<f64>,
    pub tol: Option<f64>,
    pub r: Option<Vec<f64>>,
    pub check: Option<bool>,
}

pub fn load_file(path: Option<&Path>) -> Result<FileConfig, Failure> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::config(format!("bad config {}: {e}", path.display())))
}

pub fn require_seed(seed: Option<u64>) -> Result<u64, Failure> {
    seed.ok_or_else(|| Failure::config("--seed is required (no default randomness)"))
}

#[derive(Args, Debug, Clone)]
pub struct OrderArgs {
    /// JSON file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Builtin map name (hopf, torus-cover, fs-linear) or a map spec JSON file.
    #[arg(long)]
    pub map: Option<String>,
    /// Target metric (flat, hopf, fubini-study); defaults to the builtin's own.
    #[arg(long)]
    pub metric: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Lower end of the fit range; the series itself always starts at r = 1.
    #[arg(long)]
    pub r_min: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub shells_per_decade: Option<usize>,
    /// Monte Carlo samples per shell.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Top fraction of the log-range used by the fit.
    #[arg(long)]
    pub window_fraction: Option<f64>,
    #[arg(long, value_enum)]
    pub sampler: Option<SamplerChoice>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Exit nonzero unless the order estimate is within --tol of this value.
    #[arg(long)]
    pub expect_order: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct HopfArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated radii in [10, 10^4].
    #[arg(long, value_delimiter = ',')]
    pub r: Option<Vec<f64>>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Sample budget per radius, split over the regions.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Evaluate the bound assertions and exit nonzero on failure.
    #[arg(long)]
    pub check: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ChecksArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Points per radius for the sampled suites.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
