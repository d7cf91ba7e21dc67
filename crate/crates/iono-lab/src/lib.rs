//! Experiment harness around iono-core: JSON configs with unit-suffixed keys,
//! seeded environment randomization, the headline experiments, and
//! deterministic CSV/JSON artifacts.

pub mod config;
pub mod csvio;
pub mod error;
pub mod experiments;

pub use config::{LabConfig, CONFIG_FORMAT_VERSION, PAPER_SCALE_SEEDS};
pub use error::LabError;
pub use experiments::{
    cmd_analyze, cmd_lie_sweep, cmd_mbrl_eval, cmd_mbrl_train, cmd_mimic, eval_ctrl_seed,
    eval_noise_seed, randomize_env, train_robot_seed, AnalysisDoc, EvalSummary, MimicOutcome,
    RobotArtifact, TrainArtifacts,
};
