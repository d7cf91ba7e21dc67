//! The on-robot learning loop: one random-exploration trial to bootstrap a
//! dataset, then alternating model fits and planner-driven trials, all feeding
//! a single growing dataset.

use serde::{Deserialize, Serialize};

use crate::config::{InertialConfig, SimConfig};
use crate::error::MbrlError;
use crate::mbrl::dataset::{Dataset, Transition};
use crate::mbrl::model::{train, DynamicsModel, TrainHyper};
use crate::mbrl::mpc::{mpc_select, sample_action, MpcConfig, Predictor};
use crate::mbrl::reward::RewardConfig;
use crate::seeds;
use crate::sim::{rollout, TrialRecord};
use crate::state::State12;

/// The physical setup one agent runs against: simulation parameters, vehicle
/// parameters, and the state every trial starts from. Seeds are passed at the
/// call sites so the same `Env` can host independent replicas.
#[derive(Debug, Clone)]
pub struct Env {
    pub sim: SimConfig,
    pub inertial: InertialConfig,
    pub x0: State12,
}

impl Env {
    pub fn new(sim: SimConfig, inertial: InertialConfig, x0: State12) -> Result<Env, MbrlError> {
        sim.validate()?;
        inertial.validate()?;
        Ok(Env { sim, inertial, x0 })
    }

    /// Level attitude at rest at the origin.
    pub fn hover(sim: SimConfig, inertial: InertialConfig) -> Result<Env, MbrlError> {
        Env::new(sim, inertial, State12::zero())
    }
}

/// What chooses actions during a trial.
pub enum PolicyKind<'a> {
    /// Draw each action from the planner's candidate distribution.
    Random,
    /// Random-shooting MPC through the given one-step predictor.
    Planner(&'a dyn Predictor),
}

/// A completed trial plus its contribution to the dataset. Transitions pair
/// each logged step with its successor; the last one ends at `final_state`.
#[derive(Debug, Clone)]
pub struct TrialOutput {
    pub record: TrialRecord,
    pub transitions: Vec<Transition>,
}

/// Run one closed-loop trial. `noise_seed` fixes the process-noise stream and
/// `ctrl_seed` the policy's stream; together with the start state they make
/// the trial reproducible bit-for-bit.
pub fn run_trial(
    env: &Env,
    policy: PolicyKind<'_>,
    mpc: &MpcConfig,
    reward: &RewardConfig,
    max_steps: usize,
    noise_seed: u64,
    ctrl_seed: u64,
) -> Result<TrialOutput, MbrlError> {
    mpc.validate()?;
    reward.validate()?;
    let mut noise_rng = seeds::rng(noise_seed);
    let mut ctrl_rng = seeds::rng(ctrl_seed);
    let reward_fn = |x: &State12| reward.reward(x);

    let record = rollout(
        &env.x0,
        |_, state| match &policy {
            PolicyKind::Random => sample_action(mpc, &mut ctrl_rng),
            PolicyKind::Planner(p) => mpc_select(*p, state, mpc, reward, &mut ctrl_rng)
                .expect("mpc and reward configs validated above"),
        },
        max_steps,
        &env.sim,
        &env.inertial,
        &mut noise_rng,
        Some(&reward_fn),
    )?;

    let mut transitions = Vec::with_capacity(record.log.len());
    for (i, step) in record.log.iter().enumerate() {
        let next_state = match record.log.get(i + 1) {
            Some(next) => next.state,
            None => record.final_state,
        };
        transitions.push(Transition {
            state: step.state,
            action: step.action,
            next_state,
            reward: step.reward,
        });
    }
    Ok(TrialOutput {
        record,
        transitions,
    })
}

/// Evaluate a frozen model: one planner trial, no retraining.
pub fn evaluate(
    env: &Env,
    model: &DynamicsModel,
    mpc: &MpcConfig,
    reward: &RewardConfig,
    max_steps: usize,
    noise_seed: u64,
    ctrl_seed: u64,
) -> Result<TrialOutput, MbrlError> {
    run_trial(
        env,
        PolicyKind::Planner(model),
        mpc,
        reward,
        max_steps,
        noise_seed,
        ctrl_seed,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopConfig {
    /// Total trials, including the initial random one.
    pub num_trials: usize,
    /// Control steps per trial (a crash ends a trial early).
    pub steps_per_trial: usize,
    pub hyper: TrainHyper,
    pub mpc: MpcConfig,
    pub reward: RewardConfig,
}

impl Default for LoopConfig {
    fn default() -> Self {
        LoopConfig {
            num_trials: 5,
            steps_per_trial: 1000,
            hyper: TrainHyper::default(),
            mpc: MpcConfig::default(),
            reward: RewardConfig::default(),
        }
    }
}

impl LoopConfig {
    pub fn validate(&self) -> Result<(), MbrlError> {
        if self.num_trials == 0 || self.steps_per_trial == 0 {
            return Err(MbrlError::InvalidConfig(
                "num_trials and steps_per_trial must be positive".into(),
            ));
        }
        self.hyper.validate()?;
        self.mpc.validate()?;
        self.reward.validate()?;
        Ok(())
    }
}

/// One row of the learning curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trial: usize,
    /// True when the trial explored with random actions (the bootstrap trial,
    /// or any trial run before the dataset could fill one minibatch).
    pub random_policy: bool,
    pub episode_reward: f64,
    pub yaw_rate_deg_s: f64,
    pub crashed: bool,
    pub steps: usize,
    /// Dataset size after this trial's transitions were added.
    pub dataset_size: usize,
    /// Final-epoch training loss of the model that planned this trial.
    pub train_loss: Option<f64>,
}

/// Everything `mbrl_loop` produces: per-trial summaries, the dataset, and a
/// final model trained on all of it.
#[derive(Debug, Clone)]
pub struct RobotRun {
    pub summaries: Vec<TrialSummary>,
    pub dataset: Dataset,
    pub model: DynamicsModel,
}

// Disjoint child-seed index blocks for the loop's three stream families.
fn noise_seed(robot_seed: u64, trial: usize) -> u64 {
    seeds::child_seed(robot_seed, trial as u64)
}
fn ctrl_seed(robot_seed: u64, trial: usize) -> u64 {
    seeds::child_seed(robot_seed, 1_000 + trial as u64)
}
fn train_seed(robot_seed: u64, trial: usize) -> u64 {
    seeds::child_seed(robot_seed, 2_000 + trial as u64)
}

/// Run the collect -> fit -> plan loop for one robot.
///
/// Trial 0 explores randomly. Before every later trial the model is refit from
/// scratch on all data so far; a trial whose dataset cannot yet fill one
/// minibatch falls back to random exploration instead of failing. After the
/// last trial the model is refit once more so the returned model has seen
/// everything. All randomness derives from `robot_seed`.
pub fn mbrl_loop(env: &Env, cfg: &LoopConfig, robot_seed: u64) -> Result<RobotRun, MbrlError> {
    cfg.validate()?;
    let mut dataset = Dataset::new();
    let mut summaries = Vec::with_capacity(cfg.num_trials);

    for trial in 0..cfg.num_trials {
        let mut train_loss = None;
        let mut model = None;
        if trial > 0 && dataset.len() >= cfg.hyper.batch_size {
            let hyper = TrainHyper {
                seed: train_seed(robot_seed, trial),
                ..cfg.hyper
            };
            let report = train(&dataset, &hyper)?;
            train_loss = report.epoch_losses.last().copied();
            model = Some(report.model);
        } else if trial > 0 {
            log::warn!(
                "trial {trial}: dataset has {} transitions, need {}; exploring randomly",
                dataset.len(),
                cfg.hyper.batch_size
            );
        }

        let policy = match &model {
            Some(m) => PolicyKind::Planner(m),
            None => PolicyKind::Random,
        };
        let out = run_trial(
            env,
            policy,
            &cfg.mpc,
            &cfg.reward,
            cfg.steps_per_trial,
            noise_seed(robot_seed, trial),
            ctrl_seed(robot_seed, trial),
        )?;
        for t in &out.transitions {
            dataset.push(t.state, t.action, t.next_state, t.reward);
        }
        summaries.push(TrialSummary {
            trial,
            random_policy: model.is_none(),
            episode_reward: out.record.episode_reward,
            yaw_rate_deg_s: out.record.yaw_rate_deg_s(),
            crashed: out.record.crashed,
            steps: out.record.steps(),
            dataset_size: dataset.len(),
            train_loss,
        });
    }

    let hyper = TrainHyper {
        seed: train_seed(robot_seed, cfg.num_trials),
        ..cfg.hyper
    };
    let model = train(&dataset, &hyper)?.model;
    Ok(RobotRun {
        summaries,
        dataset,
        model,
    })
}
