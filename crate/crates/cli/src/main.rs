//! `msbm`: config-driven experiment runner.

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use msbm_core::{Direction, Mode};

use crate::config::ExperimentConfig;

#[derive(Parser, Debug)]
#[command(name = "msbm", version, about = "Multi-marginal Schrodinger bridge matching experiments")]
struct Cli {
    /// TOML experiment config; missing keys take built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run a single seed instead of the config's seed list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Training mode.
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the configured synthetic dataset as snapshot files.
    Generate,
    /// Train one run per seed; writes checkpoint.json and report.json.
    Train,
    /// Simulate trained controls from the data and write trajectory CSVs.
    Simulate {
        /// Checkpoint to use instead of the one under the output directory.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = DirectionArg::Forward)]
        direction: DirectionArg,
    },
    /// Evaluate every configured protocol per seed, plus mean and std over seeds.
    Evaluate {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Side-by-side metrics and runtime of msbm and naive checkpoints.
    Compare {
        #[arg(long)]
        msbm: Option<PathBuf>,
        #[arg(long)]
        naive: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Msbm,
    Naive,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DirectionArg {
    Forward,
    Backward,
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(cli.config.as_deref())?;
    if let Some(s) = cli.seed {
        cfg.seeds = vec![s];
    }
    if let Some(m) = cli.mode {
        cfg.train.mode = match m {
            ModeArg::Msbm => Mode::Msbm,
            ModeArg::Naive => Mode::Naive,
        };
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let cfg = resolve(&cli)?;
    let mode = cfg.train.mode;
    match &cli.command {
        Command::Generate => commands::generate(&cfg),
        Command::Train => commands::train(&cfg),
        Command::Simulate { checkpoint, direction } => {
            let d = match direction {
                DirectionArg::Forward => Direction::Forward,
                DirectionArg::Backward => Direction::Backward,
            };
            commands::simulate(&cfg, mode, checkpoint.as_deref(), d)
        }
        Command::Evaluate { checkpoint } => commands::evaluate(&cfg, mode, checkpoint.as_deref()),
        Command::Compare { msbm, naive } => commands::compare(&cfg, msbm.as_deref(), naive.as_deref()),
    }
}
