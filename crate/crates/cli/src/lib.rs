//! Command-line front end: load manifests, run schemes, export traces and
//! bound audits.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod manifest;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use error::{CliError, Result};
pub use manifest::{load_consensus, load_problem, parse_manifest, Manifest};

#[derive(Debug, Parser)]
#[command(name = "pdhg", version, about = "Primal-dual and primal-only schemes for linearly constrained problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scheme and write its trace as CSV.
    Solve(SolveArgs),
    /// Check a trace against the convergence bounds.
    Audit(AuditArgs),
    /// Run decentralized consensus on a graph manifest.
    Consensus(ConsensusArgs),
    /// Solve the problem with a reference oracle.
    Oracle(OracleArgs),
}

#[derive(Debug, clap::Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value = "primal")]
    pub variant: String,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1)]
    pub record_every: usize,
    /// Initial point as a vector file; zero when absent.
    #[arg(long)]
    pub x0: Option<PathBuf>,
    /// Seed of the power iteration estimating ‖A‖.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the final running average s^k.
    #[arg(long)]
    pub solution: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Theorem {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

#[derive(Debug, clap::Args)]
pub struct AuditArgs {
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_enum)]
    pub theorem: Theorem,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConsensusVariant {
    Primal,
    Pdhg,
}

#[derive(Debug, clap::Args)]
pub struct ConsensusArgs {
    /// Consensus manifest with "graph" and "g_i".
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value = "primal")]
    pub variant: ConsensusVariant,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1)]
    pub record_every: usize,
    /// Stop once the consensus gap of x^k is at most this value.
    #[arg(long)]
    pub gap_tol: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleMode {
    Lsq,
    Kkt,
    Penalized,
}

#[derive(Debug, clap::Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_enum)]
    pub mode: OracleMode,
    /// Penalty weight for --mode penalized.
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Runs one command, returning the summary printed on success.
pub fn execute(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Solve(a) => commands::solve(&a),
        Command::Audit(a) => commands::audit(&a),
        Command::Consensus(a) => commands::consensus(&a),
        Command::Oracle(a) => commands::oracle(&a),
    }
}
