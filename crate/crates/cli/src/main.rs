//! `ionreadout` command-line tool.
//!
//! Exit codes: 0 success, 1 check failure or I/O error, 2 usage or configuration error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

mod commands;
mod output;

#[derive(Debug, Parser)]
#[command(name = "ionreadout", version)]
#[command(
    about = "Quadrature readout of a trapped-ion vibrational mode through a Fourier-transformed register"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Readout distribution P(l) for Gaussian inputs, one column per variance.
    Distribution(DistributionArgs),
    /// Estimated variance of the mapped readout versus register size.
    VarianceScan(VarianceScanArgs),
    /// Minimum number of ions needed to resolve a given variance.
    Nmin(NminArgs),
    /// Seeded Monte Carlo readouts and their histogram.
    Sample(SampleArgs),
    /// Compare the joint-state simulation with the analytic readout distribution.
    OracleCheck(OracleCheckArgs),
}

/// A variance as typed on the command line; the text is kept for column names.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "f64")]
pub struct Variance {
    text: String,
    value: f64,
}

impl Variance {
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

impl From<Variance> for f64 {
    fn from(v: Variance) -> f64 {
        v.value
    }
}

impl FromStr for Variance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let value: f64 = s.trim().parse().map_err(|e| format!("{e}"))?;
        if !(value > 0.0 && value.is_finite()) {
            return Err(format!("variance must be positive, got {s}"));
        }
        Ok(Self {
            text: s.trim().to_string(),
            value,
        })
    }
}

fn positive_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be positive, got {s}"))
    }
}

fn non_negative_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be non-negative, got {s}"))
    }
}

fn finite_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be finite, got {s}"))
    }
}

fn tolerance(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("must lie in (0, 1), got {s}"))
    }
}

fn qubits(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if (1..=ionreadout::register::MAX_QUBITS).contains(&n) {
        Ok(n)
    } else {
        Err(format!(
            "must be between 1 and {}, got {s}",
            ionreadout::register::MAX_QUBITS
        ))
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DistributionArgs {
    #[arg(long, default_value_t = 9, value_parser = qubits)]
    pub n_qubits: usize,
    /// Position variance of the input Gaussian (repeatable).
    #[arg(long = "variance", default_values = ["0.1", "1.0"])]
    pub variances: Vec<Variance>,
    #[arg(long, default_value_t = 0.01, value_parser = tolerance)]
    pub epsilon: f64,
    /// Coupling strength.
    #[arg(long, default_value_t = 1.0, value_parser = positive_f64)]
    pub r: f64,
    /// Keep x in [0, 2π) instead of reflecting the upper half of the register.
    #[arg(long)]
    pub no_reflect: bool,
    /// Lamb-Dicke parameter; enables the Lamb-Dicke validity warning.
    #[arg(long, value_parser = positive_f64)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VarianceScanArgs {
    #[arg(long)]
    pub variance: Variance,
    #[arg(long, default_value_t = 4, value_parser = qubits)]
    pub n_min: usize,
    #[arg(long, default_value_t = 14, value_parser = qubits)]
    pub n_max: usize,
    #[arg(long, default_value_t = 0.01, value_parser = tolerance)]
    pub epsilon: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NminArgs {
    #[arg(long)]
    pub variance: Variance,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long, value_parser = qubits)]
    pub n_qubits: usize,
    #[arg(long)]
    pub variance: Variance,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Shot list (`shot,l`); stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Histogram (`l,count,empirical,analytic`).
    #[arg(long)]
    pub histogram: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OracleCheckArgs {
    #[arg(long, value_parser = qubits)]
    pub n_qubits: usize,
    #[arg(long)]
    pub variance: Variance,
    /// Quadrature angle in radians.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_parser = finite_f64)]
    pub theta: f64,
    #[arg(long, default_value_t = 1.0, value_parser = non_negative_f64)]
    pub r: f64,
    #[arg(long, default_value_t = 1e-6, value_parser = positive_f64)]
    pub tolerance: f64,
    /// Lift the register and grid size caps.
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Model(#[from] ionreadout::Error),
    #[error("check failed: {0}")]
    Check(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Model(_) => 2,
            CliError::Check(_) | CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::Distribution(args) => commands::distribution(&args),
        Command::VarianceScan(args) => commands::variance_scan(&args),
        Command::Nmin(args) => commands::nmin(&args),
        Command::Sample(args) => commands::sample(&args),
        Command::OracleCheck(args) => commands::oracle_check(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
