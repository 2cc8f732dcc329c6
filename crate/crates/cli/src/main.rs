//! `repairq`: train, evaluate and compare repair-sequencing policies.
//!
//! Every command resolves its inputs, creates `runs/<timestamp>-<seed>/`
//! (root overridable with `REPAIRQ_RUNS`), writes `manifest.json`, and only
//! then computes. Exit codes: 0 success, 1 runtime failure, 2 usage error.

mod commands;
mod manifest;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use repairq::agent::ExploitationRule;
use repairq::Algorithm;

/// Bad flags or inputs detected after parsing; exits with status 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(Usage(msg.into()).into())
}

#[derive(Debug, Parser)]
#[command(name = "repairq", version, about = "Resilience-driven repair sequencing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a Q-learning agent and store its best checkpoint.
    Train(TrainArgs),
    /// Roll a checkpoint out greedily on one or more scenarios.
    Rollout(RolloutArgs),
    /// Exhaustively search every repair order of one scenario.
    Enumerate(EnumerateArgs),
    /// Search repair orders with the genetic algorithm.
    Ga(GaArgs),
    /// Enumeration, multi-seed GA and a checkpoint side by side.
    Compare(CompareArgs),
    /// Every checkpoint on every scenario.
    Crosstest(CrosstestArgs),
    /// Write a seeded set of random damage scenarios.
    Genscenarios(GenArgs),
    /// Repeat the run described by a manifest in a new run directory.
    Rerun {
        manifest: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct SystemArg {
    /// Built-in fixture (`mimo`, `substation`) or path to a system file.
    #[arg(long)]
    pub system: String,
}

/// One scenario: a catalog name or an explicit damaged set.
#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Scenario from the system's catalog (`worst` is always available).
    #[arg(long, conflicts_with = "damaged")]
    pub scenario: Option<String>,
    /// Damaged components, 1-based and comma separated.
    #[arg(long, value_delimiter = ',')]
    pub damaged: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub system: SystemArg,
    /// Defaults to `dqn`, or to the algorithm in `--config`.
    #[arg(long)]
    pub algo: Option<Algorithm>,
    /// JSON training configuration used as the base instead of the system defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub episodes: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Components repaired concurrently per step.
    #[arg(long)]
    pub units: Option<usize>,
    #[arg(long, value_parser = parse_exploitation)]
    pub exploitation: Option<ExploitationRule>,
    /// Train on random scenarios with this many damaged components instead of the worst case.
    #[arg(long)]
    pub random_k: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub target_sync: Option<usize>,
    /// Hidden layer widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    /// Store raw MW/day rewards instead of rewards divided by F0.
    #[arg(long)]
    pub raw_rewards: bool,
}

#[derive(Debug, Args)]
pub struct RolloutArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Defaults to the system named in the checkpoint.
    #[arg(long)]
    pub system: Option<String>,
    #[command(flatten)]
    pub one: ScenarioArgs,
    /// Scenario set: `ds`, `catalog`, comma-separated catalog names, or a scenario file.
    #[arg(long, conflicts_with_all = ["scenario", "damaged"])]
    pub scenarios: Option<String>,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub system: SystemArg,
    #[command(flatten)]
    pub one: ScenarioArgs,
    /// Largest number of damaged components to enumerate.
    #[arg(long, default_value_t = repairq::baselines::DEFAULT_MAX_ENUM)]
    pub max_enum: usize,
}

#[derive(Debug, Args)]
pub struct GaFlags {
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub crossover_rate: Option<f64>,
    #[arg(long)]
    pub mutation_rate: Option<f64>,
    #[arg(long)]
    pub tournament: Option<usize>,
    #[arg(long)]
    pub elite: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GaArgs {
    #[command(flatten)]
    pub system: SystemArg,
    #[command(flatten)]
    pub one: ScenarioArgs,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of consecutive seeds to run.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    #[command(flatten)]
    pub ga: GaFlags,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub system: SystemArg,
    /// Scenario set: `ds`, `catalog`, comma-separated catalog names, or a scenario file.
    #[arg(long)]
    pub scenarios: String,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// GA seeds 0..N; 0 skips the GA.
    #[arg(long, default_value_t = 10)]
    pub ga_seeds: u64,
    /// Scenarios with more damaged components skip enumeration.
    #[arg(long, default_value_t = repairq::baselines::DEFAULT_MAX_ENUM)]
    pub max_enum: usize,
    #[command(flatten)]
    pub ga: GaFlags,
}

#[derive(Debug, Args)]
pub struct CrosstestArgs {
    #[command(flatten)]
    pub system: SystemArg,
    /// `PATH` or `NAME=PATH`; repeat for each model.
    #[arg(long = "checkpoint", required = true)]
    pub checkpoints: Vec<String>,
    #[arg(long)]
    pub scenarios: String,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// System whose component count is used.
    #[arg(long, default_value = "substation")]
    pub system: String,
    /// Damaged-component counts, cycled through in order.
    #[arg(long, required = true, value_delimiter = ',')]
    pub k: Vec<usize>,
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn parse_exploitation(s: &str) -> Result<ExploitationRule, String> {
    match s {
        "greedy" => Ok(ExploitationRule::Greedy),
        "roulette" => Ok(ExploitationRule::Roulette),
        other => Err(format!("unknown exploitation rule `{other}` (greedy, roulette)")),
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse_from(std::iter::once("repairq".to_string()).chain(args.iter().cloned())) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(cli.command, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<Usage>().is_some() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
