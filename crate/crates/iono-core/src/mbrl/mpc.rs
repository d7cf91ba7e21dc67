//! Random-shooting MPC.
//!
//! Sample N candidate action sequences, roll each through a one-step predictor,
//! sum rewards over the horizon, return the first action of the argmax. Every
//! candidate draws from its own counter-derived RNG substream, so the result is
//! bit-identical no matter how the scoring work is split across threads.

use rand::{Rng, RngCore};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::config::{InertialConfig, SimConfig};
use crate::error::MbrlError;
use crate::lie::{LieAction, LieActionSet};
use crate::mbrl::model::{DynamicsModel, PredictScratch};
use crate::mbrl::reward::RewardConfig;
use crate::seeds;
use crate::sim::step_dynamics;
use crate::state::{State12, ThrusterCommand};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How candidate actions are drawn: independent per-thruster uniforms, or a
/// uniform choice among the five phased-maneuver commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ActionMode {
    Continuous,
    DiscreteLie { actions: LieActionSet },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpcConfig {
    pub horizon: usize,
    pub num_samples: usize,
    pub action_low: f64,  // N, continuous mode bound
    pub action_high: f64, // N
    pub mode: ActionMode,
    pub seed: u64,
}

impl Default for MpcConfig {
    fn default() -> Self {
        MpcConfig {
            horizon: 5,
            num_samples: 500,
            action_low: 0.0,
            action_high: 0.3e-3,
            mode: ActionMode::Continuous,
            seed: 0,
        }
    }
}

impl MpcConfig {
    pub fn validate(&self) -> Result<(), MbrlError> {
        if self.horizon == 0 || self.num_samples == 0 {
            return Err(MbrlError::InvalidConfig(
                "horizon and num_samples must be positive".into(),
            ));
        }
        if !(self.action_low.is_finite()
            && self.action_high.is_finite()
            && 0.0 <= self.action_low
            && self.action_low <= self.action_high)
        {
            return Err(MbrlError::InvalidConfig(format!(
                "need 0 <= action_low <= action_high, got [{}, {}]",
                self.action_low, self.action_high
            )));
        }
        if let ActionMode::DiscreteLie { actions } = &self.mode {
            actions.validate()?;
        }
        Ok(())
    }
}

/// One-step dynamics predictor the planner scores through.
pub trait Predictor: Sync {
    fn predict_next(&self, x: &State12, u: &ThrusterCommand) -> Result<State12, MbrlError>;

    /// Sum of rewards along one open-loop candidate. A prediction failure
    /// (e.g. stepping through the pitch singularity) scores `-inf` so the
    /// candidate is never selected. Implementors may override to reuse
    /// per-sequence scratch; the result must match this definition exactly.
    fn score_sequence(
        &self,
        x0: &State12,
        seq: &[ThrusterCommand],
        reward: &RewardConfig,
    ) -> f64 {
        let mut x = *x0;
        let mut total = 0.0;
        for u in seq {
            match self.predict_next(&x, u) {
                Ok(next) => {
                    total += reward.reward(&next);
                    x = next;
                }
                Err(_) => return f64::NEG_INFINITY,
            }
        }
        total
    }
}

impl Predictor for DynamicsModel {
    fn predict_next(&self, x: &State12, u: &ThrusterCommand) -> Result<State12, MbrlError> {
        self.predict(x, u)
    }

    fn score_sequence(
        &self,
        x0: &State12,
        seq: &[ThrusterCommand],
        reward: &RewardConfig,
    ) -> f64 {
        let mut scratch = PredictScratch::new(self.hidden());
        let mut x = *x0;
        let mut total = 0.0;
        for u in seq {
            match self.predict_into(&x, u, &mut scratch) {
                Ok(next) => {
                    total += reward.reward(&next);
                    x = next;
                }
                Err(_) => return f64::NEG_INFINITY,
            }
        }
        total
    }
}

/// Exact-dynamics predictor: integrates the true equations of motion over one
/// control period, noise-free, ignoring the stop condition. Ground truth for
/// planner tests and oracle comparisons.
#[derive(Debug, Clone)]
pub struct SimOracle {
    sim: SimConfig,
    inertial: InertialConfig,
}

impl SimOracle {
    pub fn new(sim: SimConfig, inertial: InertialConfig) -> Result<SimOracle, MbrlError> {
        let quiet = SimConfig {
            noise_sigma: 0.0,
            ..sim
        };
        quiet.validate()?;
        inertial.validate()?;
        Ok(SimOracle {
            sim: quiet,
            inertial,
        })
    }
}

impl Predictor for SimOracle {
    fn predict_next(&self, x: &State12, u: &ThrusterCommand) -> Result<State12, MbrlError> {
        let (u, _) = u.clamped(self.sim.f_max);
        let mut state = *x;
        for _ in 0..self.sim.substeps() {
            state = step_dynamics(
                &state,
                &u,
                self.sim.dt_dynamics,
                self.sim.integrator,
                &self.inertial,
            )?;
        }
        Ok(state)
    }
}

/// Draw one action from the configured distribution (also the bootstrap
/// exploration policy). Continuous mode consumes four uniforms, discrete mode
/// one index.
pub fn sample_action(cfg: &MpcConfig, rng: &mut ChaCha12Rng) -> ThrusterCommand {
    match &cfg.mode {
        ActionMode::Continuous => {
            let dist = Uniform::new_inclusive(cfg.action_low, cfg.action_high)
                .expect("validated bounds");
            ThrusterCommand::from_array(std::array::from_fn(|_| dist.sample(rng)))
        }
        ActionMode::DiscreteLie { actions } => {
            let idx = rng.random_range(0..LieAction::ALL.len());
            actions.get(LieAction::ALL[idx])
        }
    }
}

/// Candidate sequences for one planning call. Candidate c draws its whole
/// sequence from the substream `child_seed(base_seed, c)`.
pub fn sample_candidates(cfg: &MpcConfig, base_seed: u64) -> Vec<Vec<ThrusterCommand>> {
    (0..cfg.num_samples)
        .map(|c| {
            let mut rng = seeds::rng(seeds::child_seed(base_seed, c as u64));
            (0..cfg.horizon)
                .map(|_| sample_action(cfg, &mut rng))
                .collect()
        })
        .collect()
}

/// Where candidate scoring runs. `Parallel` falls back to sequential when the
/// crate is built without the `parallel` feature; scores are bit-identical
/// either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    Parallel,
}

impl ExecMode {
    pub fn auto() -> ExecMode {
        if cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }
}

/// Sum of predicted rewards over the horizon for every candidate.
pub fn score_candidates(
    predictor: &dyn Predictor,
    x0: &State12,
    candidates: &[Vec<ThrusterCommand>],
    reward: &RewardConfig,
    exec: ExecMode,
) -> Vec<f64> {
    match exec {
        ExecMode::Sequential => candidates
            .iter()
            .map(|seq| predictor.score_sequence(x0, seq, reward))
            .collect(),
        ExecMode::Parallel => {
            #[cfg(feature = "parallel")]
            {
                candidates
                    .par_iter()
                    .map(|seq| predictor.score_sequence(x0, seq, reward))
                    .collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                candidates
                    .iter()
                    .map(|seq| predictor.score_sequence(x0, seq, reward))
                    .collect()
            }
        }
    }
}

/// First index of the maximum score. NaN never wins; ties go to the lowest
/// index, so a fixed candidate order gives a fixed decision.
pub fn argmax_first(scores: &[f64]) -> usize {
    let mut best = f64::NEG_INFINITY;
    let mut idx = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > best {
            best = *s;
            idx = i;
        }
    }
    idx
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpcPlan {
    pub action: ThrusterCommand,
    pub best_index: usize,
    pub best_score: f64,
}

/// Plan one control step. Consumes exactly one `u64` from `rng` to key the
/// per-candidate substreams, so the caller's stream advances identically
/// regardless of horizon, sample count, or thread count.
pub fn mpc_plan(
    predictor: &dyn Predictor,
    x: &State12,
    cfg: &MpcConfig,
    reward: &RewardConfig,
    rng: &mut ChaCha12Rng,
    exec: ExecMode,
) -> Result<MpcPlan, MbrlError> {
    cfg.validate()?;
    reward.validate()?;
    let base_seed = rng.next_u64();
    let candidates = sample_candidates(cfg, base_seed);
    let scores = score_candidates(predictor, x, &candidates, reward, exec);
    let best = argmax_first(&scores);
    Ok(MpcPlan {
        action: candidates[best][0],
        best_index: best,
        best_score: scores[best],
    })
}

/// The planner's public face: best first action under the sampled plans.
pub fn mpc_select(
    predictor: &dyn Predictor,
    x: &State12,
    cfg: &MpcConfig,
    reward: &RewardConfig,
    rng: &mut ChaCha12Rng,
) -> Result<ThrusterCommand, MbrlError> {
    Ok(mpc_plan(predictor, x, cfg, reward, rng, ExecMode::auto())?.action)
}
