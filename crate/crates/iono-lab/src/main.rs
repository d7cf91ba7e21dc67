use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use iono_lab::{
    cmd_analyze, cmd_lie_sweep, cmd_mbrl_eval, cmd_mbrl_train, cmd_mimic, LabConfig, LabError,
    PAPER_SCALE_SEEDS,
};

#[derive(Parser)]
#[command(name = "iono-lab", version, about = "Ionocraft experiment runner")]
struct Cli {
    /// JSON experiment config; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the config's master_seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Run the full 25-seed experiment width instead of the desk-scale 5.
    #[arg(long, global = true)]
    paper_scale: bool,

    /// Overwrite artifacts from a previous run.
    #[arg(long, global = true)]
    force: bool,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Open-loop phased-maneuver sweep over the leg duration epsilon.
    LieSweep,
    /// Hover linearization, controllability ranks, and assembly table.
    Analyze,
    /// Train agents across seeds and arms; writes the learning curve.
    MbrlTrain,
    /// Roll out a saved model closed-loop and log the trajectory.
    MbrlEval {
        /// Saved model JSON from mbrl-train.
        #[arg(long)]
        model: PathBuf,
    },
    /// Discrete-action agent compared against the phased reference.
    Mimic,
}

fn run(cli: Cli) -> Result<(), LabError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let body = fs::read_to_string(path)?;
            serde_json::from_str::<LabConfig>(&body)
                .map_err(|e| LabError::Config(format!("parse {}: {e}", path.display())))?
        }
        None => LabConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if cli.paper_scale {
        cfg.experiment.num_seeds = PAPER_SCALE_SEEDS;
    }
    cfg.validate()?;

    match cli.cmd {
        Cmd::LieSweep => cmd_lie_sweep(&cfg, &cli.out),
        Cmd::Analyze => cmd_analyze(&cfg, &cli.out).map(drop),
        Cmd::MbrlTrain => cmd_mbrl_train(&cfg, &cli.out, cli.force).map(drop),
        Cmd::MbrlEval { model } => cmd_mbrl_eval(&cfg, &cli.out, &model).map(drop),
        Cmd::Mimic => cmd_mimic(&cfg, &cli.out).map(drop),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
