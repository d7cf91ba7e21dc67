use serde::{Deserialize, Serialize};

use crate::error::SimError;

/// Mass properties and geometry. The defaults describe the 2x2 cm flyer with an
/// onboard IMU; the inertia values are calibrated so the closed-loop attitude
/// timescale matches the reference open-loop yaw maneuvers (see README).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InertialConfig {
    pub mass: f64,    // kg
    pub ixx: f64,     // kg m^2
    pub iyy: f64,     // kg m^2
    pub izz: f64,     // kg m^2
    pub arm: f64,     // m, thruster moment arm about each axis
    pub gravity: f64, // m/s^2
}

impl Default for InertialConfig {
    fn default() -> Self {
        // 46 mg flyer plus payload margin; inertia tensor diagonal, near-symmetric
        // in x/y. See the harness config for the g*mm^2 source values.
        InertialConfig {
            mass: 50.0e-6,
            ixx: 1.984e-9 * INERTIA_TIMESCALE,
            iyy: 1.983e-9 * INERTIA_TIMESCALE,
            izz: 3.804e-9 * INERTIA_TIMESCALE,
            arm: 0.01,
            gravity: 9.81,
        }
    }
}

/// Scale applied to the measured moments of inertia so that the simulated
/// attitude dynamics reproduce the reference maneuver timing (stop times and
/// mean yaw rates of the open-loop Lie sequence). The measured tensor alone
/// gives angular accelerations ~50x too fast for those trajectories.
pub const INERTIA_TIMESCALE: f64 = 57.29577951308232;

impl InertialConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        for (name, v) in [
            ("mass", self.mass),
            ("ixx", self.ixx),
            ("iyy", self.iyy),
            ("izz", self.izz),
            ("arm", self.arm),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(SimError::InvalidConfig(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !self.gravity.is_finite() || self.gravity < 0.0 {
            return Err(SimError::InvalidConfig(format!(
                "gravity must be non-negative, got {}",
                self.gravity
            )));
        }
        Ok(())
    }

    /// Force per thruster that exactly cancels gravity.
    pub fn hover_force(&self) -> f64 {
        self.mass * self.gravity / 4.0
    }
}

/// Electrohydrodynamic thrust model: F = beta * i * d / mu, linear in corona
/// current. One efficiency factor per thruster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThrustParams {
    pub beta: [f64; 4], // dimensionless, 0.5..0.7 measured
    pub gap: f64,       // m, collector-emitter air gap
    pub mobility: f64,  // m^2/(V s), ion mobility in air
}

impl Default for ThrustParams {
    fn default() -> Self {
        ThrustParams {
            beta: [0.6; 4],
            gap: 500.0e-6,
            mobility: 2.0e-4,
        }
    }
}

impl ThrustParams {
    pub fn validate(&self) -> Result<(), SimError> {
        for b in self.beta {
            if !(b.is_finite() && b > 0.0) {
                return Err(SimError::InvalidConfig(format!(
                    "beta must be positive, got {b}"
                )));
            }
        }
        if !(self.gap > 0.0 && self.mobility > 0.0) {
            return Err(SimError::InvalidConfig(
                "gap and mobility must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Euler,
    Rk4,
}

/// Timing, noise, and termination for closed-loop simulation. Dynamics run at
/// `dt_dynamics` under a zero-order hold on the control, which updates every
/// `control_period`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt_dynamics: f64,    // s
    pub control_period: f64, // s, integer multiple of dt_dynamics
    /// Std of the additive Gaussian noise applied to every state dimension.
    /// Injected once per control period unless `noise_every_substep` is set.
    pub noise_sigma: f64,
    pub noise_every_substep: bool,
    pub stop_angle: f64, // rad, trial ends when |theta| or |phi| exceeds this
    pub integrator: Integrator,
    pub f_max: f64, // N, per-thruster command ceiling
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt_dynamics: 1.0e-3,
            control_period: 1.0e-2,
            noise_sigma: 0.01,
            noise_every_substep: false,
            stop_angle: 45.0_f64.to_radians(),
            integrator: Integrator::Euler,
            f_max: 0.3e-3,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt_dynamics.is_finite() && self.dt_dynamics > 0.0) {
            return Err(SimError::InvalidConfig(format!(
                "dt_dynamics must be positive, got {}",
                self.dt_dynamics
            )));
        }
        if !(self.control_period.is_finite() && self.control_period > 0.0) {
            return Err(SimError::InvalidConfig(format!(
                "control_period must be positive, got {}",
                self.control_period
            )));
        }
        let ratio = self.control_period / self.dt_dynamics;
        if (ratio - ratio.round()).abs() > 1e-6 || ratio.round() < 1.0 {
            return Err(SimError::InvalidConfig(format!(
                "control_period must be an integer multiple of dt_dynamics, got ratio {ratio}"
            )));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(SimError::InvalidConfig(format!(
                "noise_sigma must be non-negative, got {}",
                self.noise_sigma
            )));
        }
        if !(self.stop_angle > 0.0 && self.stop_angle < std::f64::consts::FRAC_PI_2) {
            return Err(SimError::InvalidConfig(format!(
                "stop_angle must lie in (0, pi/2), got {}",
                self.stop_angle
            )));
        }
        if !(self.f_max.is_finite() && self.f_max > 0.0) {
            return Err(SimError::InvalidConfig(format!(
                "f_max must be positive, got {}",
                self.f_max
            )));
        }
        Ok(())
    }

    /// Dynamics substeps per control period.
    pub fn substeps(&self) -> usize {
        (self.control_period / self.dt_dynamics).round() as usize
    }
}
