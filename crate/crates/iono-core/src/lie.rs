//! Yaw through the Lie bracket.
//!
//! Restricted to attitude kinematics with the body rates as controls, the
//! system is x_dot = f(x) wx + g(x) wy + h(x) wz over x = (psi, theta, phi).
//! The mixer gives direct authority over wx and wy only, but the bracket
//! [f, g] = (dg/dx) f - (df/dx) g equals h: alternating roll and pitch flows
//! produces net yaw at second order. `flow_composition` demonstrates exactly
//! that, and `lie_policy` turns it into a thruster schedule.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::config::{InertialConfig, SimConfig};
use crate::error::SimError;
use crate::seeds;
use crate::sim::{rollout, TrialRecord};
use crate::state::{State12, ThrusterCommand};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Attitude-only state, (psi, theta, phi).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AttitudeState {
    pub psi: f64,   // rad
    pub theta: f64, // rad
    pub phi: f64,   // rad
}

impl AttitudeState {
    pub const fn new(psi: f64, theta: f64, phi: f64) -> Self {
        AttitudeState { psi, theta, phi }
    }

    fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.psi, self.theta, self.phi)
    }

    fn from_vector(v: Vector3<f64>) -> Self {
        AttitudeState::new(v.x, v.y, v.z)
    }
}

fn check_nonsingular(theta: f64) -> Result<(), SimError> {
    if theta.abs() >= std::f64::consts::FRAC_PI_2 {
        return Err(SimError::Singularity { theta_rad: theta });
    }
    Ok(())
}

/// Input vector fields of the attitude kinematics, (f, g, h) for (wx, wy, wz).
pub fn vector_fields(
    x: &AttitudeState,
) -> Result<(Vector3<f64>, Vector3<f64>, Vector3<f64>), SimError> {
    check_nonsingular(x.theta)?;
    let (sph, cph) = x.phi.sin_cos();
    let cth = x.theta.cos();
    let tth = x.theta.tan();
    let f = Vector3::new(0.0, 0.0, 1.0);
    let g = Vector3::new(sph / cth, cph, sph * tth);
    let h = Vector3::new(cph / cth, -sph, cph * tth);
    Ok((f, g, h))
}

/// Jacobian of g with respect to (psi, theta, phi). The psi column is zero;
/// note the (theta, phi)-row-2 entry sin(phi)/cos^2(theta) pairing with the
/// theta-sensitivity of the yaw row sin(phi) sin(theta)/cos^2(theta).
pub fn jacobian_g(x: &AttitudeState) -> Result<Matrix3<f64>, SimError> {
    check_nonsingular(x.theta)?;
    let (sph, cph) = x.phi.sin_cos();
    let (sth, cth) = x.theta.sin_cos();
    let sec2 = 1.0 / (cth * cth);
    Ok(Matrix3::new(
        0.0,
        sph * sth * sec2,
        cph / cth,
        0.0,
        0.0,
        -sph,
        0.0,
        sph * sec2,
        cph * sth / cth,
    ))
}

/// [f, g] = (dg/dx) f - (df/dx) g. f is constant, so the bracket reduces to
/// the phi-column of dg/dx, which closes back onto the yaw field h.
pub fn lie_bracket_fg(x: &AttitudeState) -> Result<Vector3<f64>, SimError> {
    let f = Vector3::new(0.0, 0.0, 1.0);
    Ok(jacobian_g(x)? * f)
}

/// Endpoint of the piecewise flow `phases`, each entry (wx, wy) held for
/// `epsilon` seconds, integrated with RK4 at `substeps` steps per phase.
pub fn flow_endpoint(
    x0: &AttitudeState,
    epsilon: f64,
    substeps: usize,
    phases: &[(f64, f64)],
) -> Result<AttitudeState, SimError> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(SimError::InvalidConfig(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if substeps < 10 {
        return Err(SimError::InvalidConfig(format!(
            "flow integration needs at least 10 substeps per phase, got {substeps}"
        )));
    }
    let field = |x: Vector3<f64>, wx: f64, wy: f64| -> Result<Vector3<f64>, SimError> {
        let (f, g, _) = vector_fields(&AttitudeState::from_vector(x))?;
        Ok(f * wx + g * wy)
    };
    let mut x = x0.to_vector();
    let dt = epsilon / substeps as f64;
    for &(wx, wy) in phases {
        for _ in 0..substeps {
            let k1 = field(x, wx, wy)?;
            let k2 = field(x + k1 * (dt / 2.0), wx, wy)?;
            let k3 = field(x + k2 * (dt / 2.0), wx, wy)?;
            let k4 = field(x + k3 * dt, wx, wy)?;
            x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        }
    }
    check_nonsingular(x.y)?;
    Ok(AttitudeState::from_vector(x))
}

/// Second-order displacement of the canonical commutator cycle
/// (+f, +g, -f, -g), each leg held for `epsilon`: returns
/// (x(4 epsilon) - x0) / epsilon^2, which converges to [f, g](x0) as
/// epsilon -> 0.
pub fn flow_composition(
    x0: &AttitudeState,
    epsilon: f64,
    substeps: usize,
) -> Result<Vector3<f64>, SimError> {
    let phases = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
    let end = flow_endpoint(x0, epsilon, substeps, &phases)?;
    Ok((end.to_vector() - x0.to_vector()) / (epsilon * epsilon))
}

/// The four phased commands plus the shared equilibrium. Labels follow the
/// flight convention where the "pitch" maneuver leads with thrusters 1 and 4;
/// under this mixer that pair torques about body x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LieAction {
    PlusPitch,
    PlusRoll,
    MinusPitch,
    MinusRoll,
    Equilibrium,
}

impl LieAction {
    pub const ALL: [LieAction; 5] = [
        LieAction::PlusPitch,
        LieAction::PlusRoll,
        LieAction::MinusPitch,
        LieAction::MinusRoll,
        LieAction::Equilibrium,
    ];

    /// Cycle order of the phased maneuver.
    pub const CYCLE: [LieAction; 4] = [
        LieAction::PlusPitch,
        LieAction::PlusRoll,
        LieAction::MinusPitch,
        LieAction::MinusRoll,
    ];

    pub fn label(self) -> &'static str {
        match self {
            LieAction::PlusPitch => "plus_pitch",
            LieAction::PlusRoll => "plus_roll",
            LieAction::MinusPitch => "minus_pitch",
            LieAction::MinusRoll => "minus_roll",
            LieAction::Equilibrium => "equilibrium",
        }
    }
}

/// Thruster forces for each phased action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LieActionSet {
    pub plus_pitch: ThrusterCommand,
    pub plus_roll: ThrusterCommand,
    pub minus_pitch: ThrusterCommand,
    pub minus_roll: ThrusterCommand,
    pub equilibrium: ThrusterCommand,
}

impl Default for LieActionSet {
    fn default() -> Self {
        LieActionSet {
            plus_pitch: ThrusterCommand::from_array([0.15e-3, 0.05e-3, 0.05e-3, 0.15e-3]),
            plus_roll: ThrusterCommand::from_array([0.15e-3, 0.15e-3, 0.05e-3, 0.05e-3]),
            minus_pitch: ThrusterCommand::from_array([0.05e-3, 0.15e-3, 0.15e-3, 0.05e-3]),
            minus_roll: ThrusterCommand::from_array([0.05e-3, 0.05e-3, 0.15e-3, 0.15e-3]),
            equilibrium: ThrusterCommand::uniform(0.1e-3),
        }
    }
}

impl LieActionSet {
    pub fn get(&self, action: LieAction) -> ThrusterCommand {
        match action {
            LieAction::PlusPitch => self.plus_pitch,
            LieAction::PlusRoll => self.plus_roll,
            LieAction::MinusPitch => self.minus_pitch,
            LieAction::MinusRoll => self.minus_roll,
            LieAction::Equilibrium => self.equilibrium,
        }
    }

    /// Reverse lookup: which named action produced `cmd`, if any. Exact
    /// comparison on purpose; planner output in discrete mode is copied
    /// bit-for-bit from this set.
    pub fn identify(&self, cmd: &ThrusterCommand) -> Option<LieAction> {
        LieAction::ALL
            .into_iter()
            .find(|a| self.get(*a).to_array() == cmd.to_array())
    }

    /// Each +/- pair must average to the equilibrium command, so a full cycle
    /// applies zero net differential impulse.
    pub fn validate(&self) -> Result<(), SimError> {
        for cmd in [
            self.plus_pitch,
            self.plus_roll,
            self.minus_pitch,
            self.minus_roll,
            self.equilibrium,
        ] {
            if !cmd.is_finite() || cmd.to_array().iter().any(|f| *f < 0.0) {
                return Err(SimError::InvalidConfig(
                    "lie actions must be finite and non-negative".into(),
                ));
            }
        }
        for (plus, minus, name) in [
            (self.plus_pitch, self.minus_pitch, "pitch"),
            (self.plus_roll, self.minus_roll, "roll"),
        ] {
            let p = plus.to_array();
            let m = minus.to_array();
            let e = self.equilibrium.to_array();
            for i in 0..4 {
                if (p[i] + m[i] - 2.0 * e[i]).abs() > 1e-12 {
                    return Err(SimError::InvalidConfig(format!(
                        "{name} pair breaks mirror symmetry on thruster {}",
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Phased maneuver timing: each of the four cycle actions is held for
/// `epsilon` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LieSequenceConfig {
    pub epsilon: f64, // s
    pub actions: LieActionSet,
}

impl Default for LieSequenceConfig {
    fn default() -> Self {
        LieSequenceConfig {
            epsilon: 0.05,
            actions: LieActionSet::default(),
        }
    }
}

impl LieSequenceConfig {
    pub fn validate(&self, control_period: f64) -> Result<(), SimError> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(SimError::InvalidConfig(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        let ratio = self.epsilon / control_period;
        if (ratio - ratio.round()).abs() > 1e-6 || ratio.round() < 1.0 {
            return Err(SimError::InvalidConfig(format!(
                "epsilon must be an integer multiple of the control period, got ratio {ratio}"
            )));
        }
        self.actions.validate()
    }

    /// Action scheduled at time `t`. Phases advance every `epsilon` seconds
    /// through the four-element cycle; the small slop keeps boundaries that
    /// land on exact multiples of epsilon from flooring into the wrong phase.
    pub fn action_at(&self, t: f64) -> LieAction {
        let phase = ((t / self.epsilon + 1e-9).floor() as i64).rem_euclid(4) as usize;
        LieAction::CYCLE[phase]
    }
}

/// Open-loop phased policy.
pub fn lie_policy(t: f64, cfg: &LieSequenceConfig) -> ThrusterCommand {
    cfg.actions.get(cfg.action_at(t))
}

/// One row of a maneuver-duration sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LieSweepRow {
    pub epsilon_s: f64,
    pub yaw_rate_deg_per_s: f64,
    pub stop_time_s: f64,
}

/// Default sweep grid for the phased-maneuver characterization.
pub const SWEEP_EPSILONS: [f64; 6] = [0.01, 0.02, 0.03, 0.04, 0.06, 0.08];

/// Run the open-loop phased maneuver from rest at each epsilon and report the
/// mean yaw rate and the time at which the attitude stop condition fires
/// (capped at `cap_s`). Noise is disabled regardless of `sim.noise_sigma`:
/// this is a deterministic characterization of the maneuver itself.
pub fn lie_sweep(
    epsilons: &[f64],
    sim: &SimConfig,
    inertial: &InertialConfig,
    actions: &LieActionSet,
    cap_s: f64,
) -> Result<Vec<LieSweepRow>, SimError> {
    if !(cap_s.is_finite() && cap_s > 0.0) {
        return Err(SimError::InvalidConfig(format!(
            "cap_s must be positive, got {cap_s}"
        )));
    }
    let quiet = SimConfig {
        noise_sigma: 0.0,
        ..*sim
    };
    quiet.validate()?;
    inertial.validate()?;
    for &eps in epsilons {
        LieSequenceConfig {
            epsilon: eps,
            actions: *actions,
        }
        .validate(quiet.control_period)?;
    }

    let run_one = |&eps: &f64| -> Result<LieSweepRow, SimError> {
        let cfg = LieSequenceConfig {
            epsilon: eps,
            actions: *actions,
        };
        let rec = sweep_rollout(&cfg, &quiet, inertial, cap_s)?;
        Ok(LieSweepRow {
            epsilon_s: eps,
            yaw_rate_deg_per_s: rec.yaw_rate_deg_s(),
            stop_time_s: if rec.crashed { rec.elapsed } else { cap_s },
        })
    };

    #[cfg(feature = "parallel")]
    {
        epsilons.par_iter().map(run_one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        epsilons.iter().map(run_one).collect()
    }
}

fn sweep_rollout(
    cfg: &LieSequenceConfig,
    sim: &SimConfig,
    inertial: &InertialConfig,
    cap_s: f64,
) -> Result<TrialRecord, SimError> {
    let max_steps = (cap_s / sim.control_period).round() as usize;
    let mut rng = seeds::rng(0); // unused: noise is off
    rollout(
        &State12::zero(),
        |step, _| lie_policy(step as f64 * sim.control_period, cfg),
        max_steps,
        sim,
        inertial,
        &mut rng,
        None,
    )
}
