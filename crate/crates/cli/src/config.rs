//! Run configuration: command-line flags over a TOML file over defaults.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct ConfigFlags {
    /// TOML file with any of: precision_digits, tol, mu, output_dir, format, jobs
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// working precision in decimal digits (at least 15)
    #[arg(long, global = true)]
    pub precision_digits: Option<u32>,
    /// target absolute error of smoothed sums
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// exponent in the Main Lemma bound
    #[arg(long, global = true)]
    pub mu: Option<u32>,
    #[arg(long, global = true, env = "HECKELAB_OUTPUT_DIR")]
    pub output_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// worker threads for parallel scans
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    precision_digits: Option<u32>,
    tol: Option<f64>,
    mu: Option<u32>,
    output_dir: Option<PathBuf>,
    format: Option<Format>,
    jobs: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub precision_digits: u32,
    pub tol: f64,
    pub mu: u32,
    pub output_dir: PathBuf,
    pub format: Format,
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            precision_digits: 30,
            tol: 1e-12,
            mu: 2,
            output_dir: PathBuf::from("heckelab-output"),
            format: Format::Json,
            jobs: None,
        }
    }
}

fn read_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
}

impl RunConfig {
    pub fn resolve(flags: &ConfigFlags) -> Result<RunConfig, CliError> {
        let file = match &flags.config {
            Some(p) => read_file(p)?,
            None => FileConfig::default(),
        };
        let base = RunConfig::default();
        let cfg = RunConfig {
            precision_digits: flags
                .precision_digits
                .or(file.precision_digits)
                .unwrap_or(base.precision_digits),
            tol: flags.tol.or(file.tol).unwrap_or(base.tol),
            mu: flags.mu.or(file.mu).unwrap_or(base.mu),
            output_dir: flags
                .output_dir
                .clone()
                .or(file.output_dir)
                .unwrap_or(base.output_dir),
            format: flags.format.or(file.format).unwrap_or(base.format),
            jobs: flags.jobs.or(file.jobs),
        };
        if cfg.precision_digits < 15 {
            return Err(CliError::Usage(format!(
                "--precision-digits must be at least 15, got {}",
                cfg.precision_digits
            )));
        }
        if !(cfg.tol > 0.0) {
            return Err(CliError::Usage(format!("--tol must be positive, got {}", cfg.tol)));
        }
        if cfg.jobs == Some(0) {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        Ok(cfg)
    }
}
