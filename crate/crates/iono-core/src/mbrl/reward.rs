//! Yaw rewards.
//!
//! The sliding-mode shape is the one that works: reward accumulated yaw only
//! while the craft is upright (both tilt angles strictly inside an eta window),
//! otherwise pay the tilt penalty. The naive quadratic alternative rewards yaw
//! unconditionally and is kept as the ablation baseline; it teaches the planner
//! to trade attitude for yaw until the trial ends in a crash.

use serde::{Deserialize, Serialize};

use crate::error::MbrlError;
use crate::state::State12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardMode {
    Sliding,
    Naive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    pub mode: RewardMode,
    /// rad; attitude window half-width for the sliding mode.
    pub eta: f64,
    /// Tilt penalty weight for the naive mode.
    pub lambda: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            mode: RewardMode::Sliding,
            eta: 10.0_f64.to_radians(),
            lambda: 1.0,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), MbrlError> {
        if !(self.eta > 0.0 && self.eta < std::f64::consts::FRAC_PI_2) {
            return Err(MbrlError::InvalidConfig(format!(
                "eta must lie in (0, pi/2), got {}",
                self.eta
            )));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(MbrlError::InvalidConfig(format!(
                "lambda must be non-negative, got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    pub fn reward(&self, x: &State12) -> f64 {
        match self.mode {
            RewardMode::Sliding => {
                if x.theta.abs() < self.eta && x.phi.abs() < self.eta {
                    x.psi.abs()
                } else {
                    -(x.theta * x.theta + x.phi * x.phi)
                }
            }
            RewardMode::Naive => {
                x.psi * x.psi - self.lambda * (x.theta * x.theta + x.phi * x.phi)
            }
        }
    }
}
