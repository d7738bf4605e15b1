mod bench;
mod config;
mod ingest;
mod solve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use evsched::{BcpError, DataError};

#[derive(Parser)]
#[command(name = "evsched", version, about = "Electric bus block generation and chaining")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Split a GTFS feed or trip CSV into one trip file per depot.
    Ingest(ingest::IngestArgs),
    /// Build blocks, chain them, validate and report.
    Solve(solve::SolveArgs),
    /// Compare exact, greedy and divide-and-conquer on random subsets.
    Bench(bench::BenchArgs),
}

/// Raised when a solver output fails validation.
#[derive(Debug, thiserror::Error)]
#[error("solution failed validation with {0} violation(s)")]
pub struct ValidationFailed(pub usize);

/// Input paths shared by `solve` and `bench`.
#[derive(Debug, Clone, clap::Args)]
pub struct InputArgs {
    /// Trip CSV for one depot.
    #[arg(long, conflicts_with = "blocks")]
    pub trips: Option<PathBuf>,
    /// Ready-made blocks (CSV, or JSON lines with a `.jsonl` extension).
    #[arg(long)]
    pub blocks: Option<PathBuf>,
    /// Depot CSV; without it the depot sits at the centroid of the trip
    /// endpoints.
    #[arg(long)]
    pub depots: Option<PathBuf>,
    /// Depot to use when the depot file lists several.
    #[arg(long)]
    pub depot: Option<String>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<DataError>().is_some() {
            return 2;
        }
        if let Some(b) = cause.downcast_ref::<BcpError>() {
            return match b.root() {
                BcpError::Infeasible { .. } => 3,
                BcpError::TimeLimitWithoutIncumbent => 4,
                _ => 2,
            };
        }
        if cause.downcast_ref::<ValidationFailed>().is_some() {
            return 1;
        }
    }
    2
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Ingest(a) => ingest::run(a),
        Cmd::Solve(a) => solve::run(a),
        Cmd::Bench(a) => bench::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
