//! Thrust production and the force/torque mixer.
//!
//! Each corner thruster accelerates ions across a fixed air gap; thrust is
//! linear in corona current, F = beta * i * d / mu. All four point along -z in
//! the body frame (thrust pushes the body toward +z), so the mixer has no yaw
//! row: tau_z is structurally zero regardless of the command.

use serde::{Deserialize, Serialize};

use crate::config::{InertialConfig, ThrustParams};
use crate::error::SimError;
use crate::state::ThrusterCommand;

/// Net body-frame force and torque produced by a thruster command.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BodyForces {
    pub fz: f64,    // N, along body +z
    pub tau_x: f64, // N m
    pub tau_y: f64, // N m
    pub tau_z: f64, // N m, always 0
}

/// Thrust of thruster `index` (1-based) at corona current `current` (A).
pub fn thrust_from_current(
    current: f64,
    params: &ThrustParams,
    index: usize,
) -> Result<f64, SimError> {
    if !(1..=4).contains(&index) {
        return Err(SimError::ThrusterIndex(index));
    }
    if !current.is_finite() || current < 0.0 {
        return Err(SimError::NegativeCurrent(current));
    }
    Ok(params.beta[index - 1] * current * params.gap / params.mobility)
}

/// Current needed to produce `force` (N) on thruster `index` (1-based).
pub fn current_from_thrust(
    force: f64,
    params: &ThrustParams,
    index: usize,
) -> Result<f64, SimError> {
    if !(1..=4).contains(&index) {
        return Err(SimError::ThrusterIndex(index));
    }
    if !force.is_finite() || force < 0.0 {
        return Err(SimError::NegativeCurrent(force));
    }
    Ok(force * params.mobility / (params.beta[index - 1] * params.gap))
}

/// Map per-thruster forces to net body force and torques.
///
/// With thruster 1 at (+x,+y) and 2..4 counterclockwise, each arm contributes
/// `arm` in both axes:
///   tau_x = arm * (-f1 + f2 + f3 - f4)
///   tau_y = arm * (-f1 - f2 + f3 + f4)
pub fn mix_forces(cmd: &ThrusterCommand, inertial: &InertialConfig) -> BodyForces {
    let ThrusterCommand { f1, f2, f3, f4 } = *cmd;
    let l = inertial.arm;
    BodyForces {
        fz: f1 + f2 + f3 + f4,
        tau_x: l * (-f1 + f2 + f3 - f4),
        tau_y: l * (-f1 - f2 + f3 + f4),
        tau_z: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn half_milliamp_gives_three_quarter_millinewton() {
        // 0.6 * 0.5e-3 A * 500e-6 m / 2e-4 m^2/(Vs) = 7.5e-4 N.
        let f = thrust_from_current(0.5e-3, &ThrustParams::default(), 1).unwrap();
        assert_relative_eq!(f, 7.5e-4, max_relative = 1e-12);
    }

    #[test]
    fn equilibrium_force_needs_67_microamps() {
        let i = current_from_thrust(0.1e-3, &ThrustParams::default(), 2).unwrap();
        assert_relative_eq!(i, 6.666_666_666_666_667e-5, max_relative = 1e-12);
    }

    #[test]
    fn thrust_current_round_trip() {
        let params = ThrustParams {
            beta: [0.5, 0.55, 0.65, 0.7],
            ..ThrustParams::default()
        };
        for idx in 1..=4 {
            let f = thrust_from_current(0.2e-3, &params, idx).unwrap();
            let i = current_from_thrust(f, &params, idx).unwrap();
            assert_relative_eq!(i, 0.2e-3, max_relative = 1e-12);
        }
    }

    #[test]
    fn negative_current_and_bad_index_rejected() {
        assert!(thrust_from_current(-1.0e-6, &ThrustParams::default(), 1).is_err());
        assert!(thrust_from_current(1.0e-6, &ThrustParams::default(), 0).is_err());
        assert!(thrust_from_current(1.0e-6, &ThrustParams::default(), 5).is_err());
    }

    #[test]
    fn roll_pair_produces_pure_pitch_torque() {
        // f1 = f2 = 0.15 mN, f3 = f4 = 0.05 mN: tau_y = -2e-6 N m, tau_x = 0.
        let cmd = ThrusterCommand::from_array([0.15e-3, 0.15e-3, 0.05e-3, 0.05e-3]);
        let out = mix_forces(&cmd, &InertialConfig::default());
        assert_relative_eq!(out.tau_y, -2.0e-6, max_relative = 1e-12);
        assert_relative_eq!(out.tau_x, 0.0, epsilon = 1e-18);
        assert_relative_eq!(out.fz, 0.4e-3, max_relative = 1e-12);
    }

    #[test]
    fn pitch_pair_produces_pure_roll_torque() {
        let cmd = ThrusterCommand::from_array([0.15e-3, 0.05e-3, 0.05e-3, 0.15e-3]);
        let out = mix_forces(&cmd, &InertialConfig::default());
        assert_relative_eq!(out.tau_x, -2.0e-6, max_relative = 1e-12);
        assert_relative_eq!(out.tau_y, 0.0, epsilon = 1e-18);
    }

    proptest! {
        /// No command can generate yaw torque.
        #[test]
        fn yaw_torque_is_structurally_zero(
            f1 in 0.0..0.3e-3, f2 in 0.0..0.3e-3, f3 in 0.0..0.3e-3, f4 in 0.0..0.3e-3
        ) {
            let cmd = ThrusterCommand::from_array([f1, f2, f3, f4]);
            let out = mix_forces(&cmd, &InertialConfig::default());
            prop_assert_eq!(out.tau_z, 0.0);
        }

        /// Mixer is linear: mixing a sum equals summing mixes.
        #[test]
        fn mixer_is_linear(
            a in proptest::array::uniform4(0.0..0.2e-3),
            b in proptest::array::uniform4(0.0..0.2e-3)
        ) {
            let inertial = InertialConfig::default();
            let sum = ThrusterCommand::from_array([a[0]+b[0], a[1]+b[1], a[2]+b[2], a[3]+b[3]]);
            let ma = mix_forces(&ThrusterCommand::from_array(a), &inertial);
            let mb = mix_forces(&ThrusterCommand::from_array(b), &inertial);
            let ms = mix_forces(&sum, &inertial);
            prop_assert!((ms.fz - (ma.fz + mb.fz)).abs() < 1e-15);
            prop_assert!((ms.tau_x - (ma.tau_x + mb.tau_x)).abs() < 1e-15);
            prop_assert!((ms.tau_y - (ma.tau_y + mb.tau_y)).abs() < 1e-15);
        }
    }
}
