//! Model-based reinforcement learning for yaw: learn a one-step dynamics
//! model from logged transitions, plan through it with random-shooting MPC,
//! and iterate collect -> retrain -> plan.

pub mod agent;
pub mod dataset;
pub mod model;
pub mod mpc;
pub mod nn;
pub mod reward;

pub use agent::{evaluate, mbrl_loop, run_trial, Env, LoopConfig, PolicyKind, RobotRun, TrialOutput, TrialSummary};
pub use dataset::{Dataset, Normalization, Transition, INPUT_DIM, OUTPUT_DIM};
pub use model::{train, DynamicsModel, TrainHyper, TrainReport, MODEL_FORMAT_VERSION};
pub use mpc::{
    mpc_plan, mpc_select, sample_action, score_candidates, ActionMode, ExecMode, MpcConfig,
    MpcPlan, Predictor, SimOracle,
};
pub use reward::{RewardConfig, RewardMode};
