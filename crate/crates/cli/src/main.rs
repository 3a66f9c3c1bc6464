//! `hooprate`: the rating pipeline as subcommands.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "hooprate", version, about = "Bayesian offensive and defensive player ratings from play-by-play logs")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Season labels to use, in chain order.
    #[arg(long, global = true, value_name = "LIST", value_delimiter = ',')]
    pub seasons: Option<Vec<String>>,
    #[arg(long, global = true, value_enum)]
    pub model: Option<ModelArg>,
    /// Output directory (default `out`).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Box-score cross-check tolerance in seconds.
    #[arg(long, global = true, value_name = "REAL")]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Multi,
    Single,
    Isolated,
}

#[derive(Debug, Clone, Args, Default)]
pub struct Inputs {
    /// JSON-lines event log.
    #[arg(long, value_name = "PATH")]
    pub logs: Option<PathBuf>,
    /// Box-score CSV.
    #[arg(long, value_name = "PATH")]
    pub boxscores: Option<PathBuf>,
    /// Interval CSV written by `ingest`.
    #[arg(long, value_name = "PATH")]
    pub intervals: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic league: logs, box scores, truth and stats.
    Simulate,
    /// Parse event logs into constant-lineup intervals.
    Ingest(Inputs),
    /// Cross-check inferred playing time against box scores.
    Validate(Inputs),
    /// Fit the prior hyperparameters by maximum marginal likelihood.
    FitHyper(Inputs),
    /// Fit the between-season transition parameters.
    FitTransition(Inputs),
    /// Produce centred ratings under one model or all three.
    Rate {
        #[command(flatten)]
        inputs: Inputs,
        /// Write multi, single and isolated ratings plus a side-by-side report.
        #[arg(long)]
        all_models: bool,
    },
    /// Probability that player A's combined ability exceeds player B's.
    Compare {
        a: String,
        b: String,
        /// Belief JSON written by `rate` (default `<out>/belief_<model>.json`).
        #[arg(long, value_name = "PATH")]
        belief: Option<PathBuf>,
    },
    /// Select MVP, DPOY, rookie and most-improved awards.
    Awards(Inputs),
    /// Regress ratings on per-player box-score statistics.
    RegressStats {
        /// Player statistics CSV.
        #[arg(long, value_name = "PATH")]
        stats: Option<PathBuf>,
        /// Ratings CSV written by `rate` (default `<out>/ratings_<model>.csv`).
        #[arg(long, value_name = "PATH")]
        ratings: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Ingest(_) => "ingest",
            Command::Validate(_) => "validate",
            Command::FitHyper(_) => "fit-hyper",
            Command::FitTransition(_) => "fit-transition",
            Command::Rate { .. } => "rate",
            Command::Compare { .. } => "compare",
            Command::Awards(_) => "awards",
            Command::RegressStats { .. } => "regress-stats",
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(cli, std::env::args().skip(1).collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
