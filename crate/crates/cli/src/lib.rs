//! Command-line front end: bounds for user matrices, reverse-Jensen
//! constants, seeded verification suites and reproduction of the printed
//! numeric examples. Every command emits a [`report::ReportDocument`].

pub mod analytic;
pub mod commands;
pub mod matrix_file;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use report::ReportDocument;

/// Exit status for a run whose inequalities all held.
pub const EXIT_PASS: i32 = 0;
/// Exit status for unreadable input, bad flags or invalid configuration.
pub const EXIT_INPUT: i32 = 2;
/// Exit status when a verified inequality failed.
pub const EXIT_FAIL: i32 = 3;

/// Environment variable overriding the default absolute tolerance.
pub const TOL_ENV: &str = "SUPERQUAD_TOL";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] superquad_core::Error),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Parser)]
#[command(
    name = "superquad",
    version,
    about = "Eigenvalue bounds for superquadratic matrix functions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one bound on matrices read from JSON files.
    Bound(BoundArgs),
    /// Compute a reverse-Jensen or Kantorovich constant.
    Constants(ConstantsArgs),
    /// Run the randomized verification suites.
    Verify(VerifyArgs),
    /// Recompute the printed numeric examples.
    Reproduce,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Theorem {
    Thm21,
    Cor22,
    Cor23,
    Cor24,
    Thm25,
    Thm29,
    Cor210,
    Cor211,
    Sandwich,
    Dilation,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long, value_enum)]
    pub theorem: Theorem,
    /// Function specifier such as `neg_pow_q:4/3` or `pow_p:3`.
    #[arg(long)]
    pub f: Option<String>,
    #[arg(long)]
    pub a: Option<PathBuf>,
    #[arg(long)]
    pub b: Option<PathBuf>,
    /// First summand for `sandwich`, or the base matrix for `dilation`.
    #[arg(long)]
    pub x: Option<PathBuf>,
    #[arg(long)]
    pub y: Option<PathBuf>,
    /// Contraction for `dilation`.
    #[arg(long)]
    pub c: Option<PathBuf>,
    /// `C` block of the positive map for `thm25`.
    #[arg(long)]
    pub map_c: Option<PathBuf>,
    /// `D` block of the positive map for `thm25`.
    #[arg(long)]
    pub map_d: Option<PathBuf>,
    #[arg(long, default_value = "0.5")]
    pub alpha: String,
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long, default_value = "derived")]
    pub variant: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConstantKind {
    Gamma,
    Kantorovich,
    #[value(name = "kantorovich_abs", alias = "kantorovich-abs")]
    KantorovichAbs,
    T0,
    Secant,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    #[arg(long, value_enum)]
    pub kind: ConstantKind,
    /// `pow:p` for `tᵖ`, `abs:<specifier>` for `f(|t|)`, or a function
    /// specifier.
    #[arg(long)]
    pub g: Option<String>,
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub m: String,
    #[arg(long = "M", allow_hyphen_values = true)]
    pub big_m: String,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// JSON suite configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Comma-separated dimensions.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Comma-separated check names to run.
    #[arg(long, value_delimiter = ',')]
    pub checks: Option<Vec<String>>,
}

/// Result of one invocation: the report (absent on input errors) and the
/// exit status.
pub struct Outcome {
    pub report: Option<ReportDocument>,
    pub exit_code: i32,
    pub error: Option<String>,
}

/// Runs a parsed command line, writing `--out` when requested.
pub fn run(cli: &Cli) -> Outcome {
    let result = match &cli.command {
        Command::Bound(args) => commands::bound(args),
        Command::Constants(args) => commands::constants(args),
        Command::Verify(args) => commands::verify(args),
        Command::Reproduce => commands::reproduce(),
    };
    let result = result.and_then(|(report, code)| {
        if let Some(path) = &cli.out {
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            std::fs::write(path, text + "\n").map_err(|source| CliError::Write {
                path: path.clone(),
                source,
            })?;
        }
        Ok((report, code))
    });
    match result {
        Ok((report, exit_code)) => Outcome {
            report: Some(report),
            exit_code,
            error: None,
        },
        Err(e) => Outcome {
            report: None,
            exit_code: EXIT_INPUT,
            error: Some(e.to_string()),
        },
    }
}
