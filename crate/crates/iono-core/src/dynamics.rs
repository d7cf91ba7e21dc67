//! Rigid-body equations of motion.

use nalgebra::Vector3;

use crate::config::InertialConfig;
use crate::error::SimError;
use crate::rotation::{body_to_inertial, euler_rates};
use crate::state::{State12, ThrusterCommand};
use crate::thrust::mix_forces;

/// Continuous-time state derivative under a held thruster command.
///
/// Translation: v_dot = F/m - omega x v, with the thrust sum along body +z and
/// gravity rotated into the body frame. Rotation: Euler's equations with a
/// diagonal inertia tensor. Errors at the pitch singularity.
pub fn derivative(
    x: &State12,
    u: &ThrusterCommand,
    inertial: &InertialConfig,
) -> Result<State12, SimError> {
    let q = body_to_inertial(x.psi, x.theta, x.phi);
    let v = Vector3::new(x.vx, x.vy, x.vz);
    let omega = Vector3::new(x.wx, x.wy, x.wz);

    let pos_rate = q * v;
    let angle_rate = euler_rates(x.theta, x.phi, omega)?;

    let forces = mix_forces(u, inertial);
    let thrust_acc = Vector3::new(0.0, 0.0, forces.fz / inertial.mass);
    // Q^T e3 is Q's third row; gravity acts along inertial -z.
    let gravity_acc = -inertial.gravity * Vector3::new(q[(2, 0)], q[(2, 1)], q[(2, 2)]);
    let v_rate = thrust_acc + gravity_acc - omega.cross(&v);

    let (ixx, iyy, izz) = (inertial.ixx, inertial.iyy, inertial.izz);
    let w_rate = Vector3::new(
        (forces.tau_x + (iyy - izz) * omega.y * omega.z) / ixx,
        (forces.tau_y + (izz - ixx) * omega.x * omega.z) / iyy,
        (forces.tau_z + (ixx - iyy) * omega.x * omega.y) / izz,
    );

    Ok(State12 {
        x: pos_rate.x,
        y: pos_rate.y,
        z: pos_rate.z,
        psi: angle_rate.x,
        theta: angle_rate.y,
        phi: angle_rate.z,
        vx: v_rate.x,
        vy: v_rate.y,
        vz: v_rate.z,
        wx: w_rate.x,
        wy: w_rate.y,
        wz: w_rate.z,
    })
}
