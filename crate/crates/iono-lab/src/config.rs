//! The experiment config: one JSON document, unit-suffixed keys, every field
//! defaulted, unknown keys rejected. Everything converts to the SI structures
//! of iono-core at the command boundary.

use iono_core::config::INERTIA_TIMESCALE;
use iono_core::lie::{LieActionSet, LieSequenceConfig};
use iono_core::mbrl::{ActionMode, LoopConfig, MpcConfig, RewardConfig, RewardMode, TrainHyper};
use iono_core::{InertialConfig, Integrator, SimConfig};
use serde::{Deserialize, Serialize};

use crate::error::LabError;

pub const CONFIG_FORMAT_VERSION: u32 = 1;

/// Robot count per arm under --paper-scale; the desk default is 5.
pub const PAPER_SCALE_SEEDS: usize = 25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LabConfig {
    pub format_version: u32,
    /// Root of every random stream; override with --seed.
    pub master_seed: u64,
    pub sim: SimBlock,
    pub inertial: InertialBlock,
    pub mpc: MpcBlock,
    pub reward: RewardBlock,
    pub training: TrainingBlock,
    pub randomization: RandomizationBlock,
    pub experiment: ExperimentBlock,
}

impl Default for LabConfig {
    fn default() -> Self {
        LabConfig {
            format_version: CONFIG_FORMAT_VERSION,
            master_seed: 0,
            sim: SimBlock::default(),
            inertial: InertialBlock::default(),
            mpc: MpcBlock::default(),
            reward: RewardBlock::default(),
            training: TrainingBlock::default(),
            randomization: RandomizationBlock::default(),
            experiment: ExperimentBlock::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimBlock {
    pub dt_dynamics_ms: f64,
    pub control_period_ms: f64,
    pub noise_sigma: f64,
    pub noise_every_substep: bool,
    pub stop_angle_deg: f64,
    pub integrator: Integrator,
    pub f_max_mn: f64,
}

impl Default for SimBlock {
    fn default() -> Self {
        SimBlock {
            dt_dynamics_ms: 1.0,
            control_period_ms: 10.0,
            noise_sigma: 0.01,
            noise_every_substep: false,
            stop_angle_deg: 45.0,
            integrator: Integrator::Euler,
            f_max_mn: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InertialBlock {
    pub mass_mg: f64,
    pub ixx_g_mm2: f64,
    pub iyy_g_mm2: f64,
    pub izz_g_mm2: f64,
    /// Calibration factor applied to the measured inertia tensor (see README).
    pub inertia_timescale: f64,
    pub arm_cm: f64,
    pub gravity_m_s2: f64,
}

impl Default for InertialBlock {
    fn default() -> Self {
        InertialBlock {
            mass_mg: 50.0,
            ixx_g_mm2: 1.984,
            iyy_g_mm2: 1.983,
            izz_g_mm2: 3.804,
            inertia_timescale: INERTIA_TIMESCALE,
            arm_cm: 1.0,
            gravity_m_s2: 9.81,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionModeKind {
    Continuous,
    DiscreteLie,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MpcBlock {
    pub horizon: usize,
    pub num_samples: usize,
    pub action_low_mn: f64,
    pub action_high_mn: f64,
    pub action_mode: ActionModeKind,
}

impl Default for MpcBlock {
    fn default() -> Self {
        MpcBlock {
            horizon: 5,
            num_samples: 500,
            action_low_mn: 0.0,
            action_high_mn: 0.3,
            action_mode: ActionModeKind::Continuous,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardBlock {
    pub mode: RewardMode,
    pub eta_deg: f64,
    pub lambda: f64,
}

impl Default for RewardBlock {
    fn default() -> Self {
        RewardBlock {
            mode: RewardMode::Sliding,
            eta_deg: 10.0,
            lambda: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingBlock {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub hidden: usize,
}

impl Default for TrainingBlock {
    fn default() -> Self {
        let h = TrainHyper::default();
        TrainingBlock {
            epochs: h.epochs,
            learning_rate: h.learning_rate,
            batch_size: h.batch_size,
            hidden: h.hidden,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RandomizationBlock {
    /// v: each of mass, ixx, iyy, izz is scaled by U(1 - v, 1 + v).
    pub inertia_variation_frac: f64,
    /// r: initial roll and pitch drawn from U(-r, r).
    pub init_angle_range_deg: f64,
}

impl Default for RandomizationBlock {
    fn default() -> Self {
        RandomizationBlock {
            inertia_variation_frac: 0.15,
            init_angle_range_deg: 22.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentBlock {
    /// Robots per arm in mbrl-train.
    pub num_seeds: usize,
    pub num_trials: usize,
    pub steps_per_trial: usize,
    pub lie_epsilons_s: Vec<f64>,
    /// Sweep rollouts stop here when the attitude never trips the stop angle.
    pub sweep_cap_s: f64,
    pub mimic_epsilon_s: f64,
    pub mimic_init_pitch_deg: f64,
    pub mimic_init_roll_deg: f64,
    pub mimic_logged_steps: usize,
}

impl Default for ExperimentBlock {
    fn default() -> Self {
        ExperimentBlock {
            num_seeds: 5,
            num_trials: 10,
            steps_per_trial: 1000,
            lie_epsilons_s: iono_core::lie::SWEEP_EPSILONS.to_vec(),
            sweep_cap_s: 10.0,
            mimic_epsilon_s: 0.05,
            // Slight tilt: enough to break symmetry, small enough that the
            // first-order tilt-to-yaw coupling cannot out-score the
            // commutator cycle over the planning horizon.
            mimic_init_pitch_deg: 2.0,
            mimic_init_roll_deg: 2.0,
            mimic_logged_steps: 25,
        }
    }
}

impl LabConfig {
    // Unit conversions divide by exact powers of ten: a single correctly
    // rounded step from the JSON value, instead of multiplying by an inexact
    // negative power.
    pub fn sim(&self) -> SimConfig {
        SimConfig {
            dt_dynamics: self.sim.dt_dynamics_ms / 1e3,
            control_period: self.sim.control_period_ms / 1e3,
            noise_sigma: self.sim.noise_sigma,
            noise_every_substep: self.sim.noise_every_substep,
            stop_angle: self.sim.stop_angle_deg.to_radians(),
            integrator: self.sim.integrator,
            f_max: self.sim.f_max_mn / 1e3,
            seed: self.master_seed,
        }
    }

    pub fn inertial(&self) -> InertialConfig {
        let i = &self.inertial;
        InertialConfig {
            mass: i.mass_mg / 1e6,
            ixx: i.ixx_g_mm2 / 1e9 * i.inertia_timescale,
            iyy: i.iyy_g_mm2 / 1e9 * i.inertia_timescale,
            izz: i.izz_g_mm2 / 1e9 * i.inertia_timescale,
            arm: i.arm_cm / 1e2,
            gravity: i.gravity_m_s2,
        }
    }

    pub fn mpc(&self) -> MpcConfig {
        MpcConfig {
            horizon: self.mpc.horizon,
            num_samples: self.mpc.num_samples,
            action_low: self.mpc.action_low_mn / 1e3,
            action_high: self.mpc.action_high_mn / 1e3,
            mode: match self.mpc.action_mode {
                ActionModeKind::Continuous => ActionMode::Continuous,
                ActionModeKind::DiscreteLie => ActionMode::DiscreteLie {
                    actions: LieActionSet::default(),
                },
            },
            seed: 0, // planner streams derive from the per-trial rng, not this
        }
    }

    pub fn reward(&self) -> RewardConfig {
        RewardConfig {
            mode: self.reward.mode,
            eta: self.reward.eta_deg.to_radians(),
            lambda: self.reward.lambda,
        }
    }

    /// Hyperparameters with a placeholder seed; mbrl_loop reseeds per fit.
    pub fn hyper(&self) -> TrainHyper {
        TrainHyper {
            epochs: self.training.epochs,
            learning_rate: self.training.learning_rate,
            batch_size: self.training.batch_size,
            hidden: self.training.hidden,
            seed: 0,
        }
    }

    pub fn loop_cfg(&self) -> LoopConfig {
        LoopConfig {
            num_trials: self.experiment.num_trials,
            steps_per_trial: self.experiment.steps_per_trial,
            hyper: self.hyper(),
            mpc: self.mpc(),
            reward: self.reward(),
        }
    }

    pub fn validate(&self) -> Result<(), LabError> {
        if self.format_version != CONFIG_FORMAT_VERSION {
            return Err(LabError::Config(format!(
                "format_version {} (expected {CONFIG_FORMAT_VERSION})",
                self.format_version
            )));
        }
        let cfg = |e: String| LabError::Config(e);
        self.sim().validate().map_err(|e| cfg(e.to_string()))?;
        self.inertial().validate().map_err(|e| cfg(e.to_string()))?;
        self.mpc().validate().map_err(|e| cfg(e.to_string()))?;
        self.reward().validate().map_err(|e| cfg(e.to_string()))?;
        self.hyper().validate().map_err(|e| cfg(e.to_string()))?;

        let r = &self.randomization;
        if !(r.inertia_variation_frac.is_finite()
            && (0.0..0.5).contains(&r.inertia_variation_frac))
        {
            return Err(cfg(format!(
                "inertia_variation_frac must lie in [0, 0.5), got {}",
                r.inertia_variation_frac
            )));
        }
        if !(r.init_angle_range_deg > 0.0 && r.init_angle_range_deg < self.sim.stop_angle_deg) {
            return Err(cfg(format!(
                "init_angle_range_deg must lie in (0, {}), got {}",
                self.sim.stop_angle_deg, r.init_angle_range_deg
            )));
        }

        let e = &self.experiment;
        if e.num_seeds == 0 || e.num_trials == 0 || e.steps_per_trial == 0 {
            return Err(cfg(
                "num_seeds, num_trials, and steps_per_trial must be positive".into(),
            ));
        }
        if e.mimic_logged_steps == 0 {
            return Err(cfg("mimic_logged_steps must be positive".into()));
        }
        if e.lie_epsilons_s.is_empty() {
            return Err(cfg("lie_epsilons_s must not be empty".into()));
        }
        if !(e.sweep_cap_s.is_finite() && e.sweep_cap_s > 0.0) {
            return Err(cfg(format!(
                "sweep_cap_s must be positive, got {}",
                e.sweep_cap_s
            )));
        }
        let control_period = self.sim().control_period;
        for &eps in e.lie_epsilons_s.iter().chain([&e.mimic_epsilon_s]) {
            LieSequenceConfig {
                epsilon: eps,
                actions: LieActionSet::default(),
            }
            .validate(control_period)
            .map_err(|err| cfg(err.to_string()))?;
        }
        for (name, v) in [
            ("mimic_init_pitch_deg", e.mimic_init_pitch_deg),
            ("mimic_init_roll_deg", e.mimic_init_roll_deg),
        ] {
            if !(v.is_finite() && v.abs() < self.sim.stop_angle_deg) {
                return Err(cfg(format!(
                    "{name} must lie strictly inside the stop angle, got {v}"
                )));
            }
        }
        Ok(())
    }
}
