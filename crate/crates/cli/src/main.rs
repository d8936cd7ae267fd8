//! `sarfa`: saliency maps for chess engines and frame-based agents.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{env_name, RunConfig, Settings};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "sarfa", version, about = "Perturbation-based saliency maps for game-playing agents")]
struct Cli {
    /// TOML settings file (keys are flag names); also SARFA_CONFIG
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Saliency of every piece for one move
    ExplainChess(commands::ExplainChess),
    /// Saliency of frame regions for one action of an external agent
    ExplainFrame(commands::ExplainFrame),
    /// ROC and AUC of one method against a labeled dataset
    EvalAuc(commands::EvalReportArgs),
    /// AUC of SARFA, its combiner variants and the baselines
    EvalAblation(commands::EvalReportArgs),
    /// AUC before and after removing one irrelevant piece per puzzle
    EvalRobustness(commands::EvalRobustness),
    /// Majority-vote dataset from three expert label sets per puzzle
    DatasetBuild(commands::DatasetBuild),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let env = Settings::from_env(|k| std::env::var(k).ok())?;
    let file_path = cli.config.or_else(|| std::env::var_os(env_name("config")).map(PathBuf::from));
    let file = match &file_path {
        Some(p) => Settings::from_file(p)?,
        None => Settings::default(),
    };
    let config = RunConfig::resolve(cli.settings, env, file)?;
    match &cli.command {
        Command::ExplainChess(a) => commands::explain_chess(a, &config),
        Command::ExplainFrame(a) => commands::explain_frame(a, &config),
        Command::EvalAuc(a) => commands::eval_auc(a, &config),
        Command::EvalAblation(a) => commands::eval_ablation(a, &config),
        Command::EvalRobustness(a) => commands::eval_robustness(a, &config),
        Command::DatasetBuild(a) => commands::dataset_build(a, &config),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
