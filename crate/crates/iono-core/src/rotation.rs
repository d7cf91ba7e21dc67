//! Attitude kinematics for the ZYX (yaw-pitch-roll) Euler convention.

use nalgebra::{Matrix3, Vector3};

use crate::error::SimError;

/// Rotation taking body-frame vectors to the inertial frame,
/// Q = Rz(psi) * Ry(theta) * Rx(phi).
pub fn body_to_inertial(psi: f64, theta: f64, phi: f64) -> Matrix3<f64> {
    let (sps, cps) = psi.sin_cos();
    let (sth, cth) = theta.sin_cos();
    let (sph, cph) = phi.sin_cos();
    Matrix3::new(
        cth * cps,
        cps * sth * sph - cph * sps,
        sph * sps + cph * cps * sth,
        cth * sps,
        cph * cps + sth * sph * sps,
        cph * sth * sps - cps * sph,
        -sth,
        cth * sph,
        cth * cph,
    )
}

/// Euler angle rates from body angular rates: (psi_dot, theta_dot, phi_dot) =
/// W^-1(theta, phi) * omega. Undefined at |theta| = pi/2, where the yaw and
/// roll axes align.
pub fn euler_rates(
    theta: f64,
    phi: f64,
    omega: Vector3<f64>,
) -> Result<Vector3<f64>, SimError> {
    let cth = theta.cos();
    if theta.abs() >= std::f64::consts::FRAC_PI_2 || cth.abs() < 1e-12 {
        return Err(SimError::Singularity { theta_rad: theta });
    }
    let (sph, cph) = phi.sin_cos();
    let tth = theta.tan();
    let (wx, wy, wz) = (omega.x, omega.y, omega.z);
    Ok(Vector3::new(
        (sph * wy + cph * wz) / cth,
        cph * wy - sph * wz,
        wx + tth * (sph * wy + cph * wz),
    ))
}
