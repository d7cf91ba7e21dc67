//! Linearization and controllability analysis.
//!
//! The interesting question for this vehicle is which directions the linearized
//! dynamics can actually reach: with no yaw torque row in the mixer, yaw angle
//! and yaw rate drop out of the controllable subspace at hover, and the rank
//! deficit is what motivates the nonlinear (Lie bracket) yaw strategy.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::config::InertialConfig;
use crate::dynamics::derivative;
use crate::error::SimError;
use crate::state::{State12, ThrusterCommand, STATE_DIM, STATE_LABELS};

pub const INPUT_LABELS: [&str; 4] = ["f1", "f2", "f3", "f4"];

/// Step sizes for the central-difference Jacobians. States are O(1) in SI
/// units; thruster forces are O(1e-4) N, hence the much smaller input step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearizeOptions {
    pub h_state: f64,
    pub h_input: f64,
    /// Residual norm above which the expansion point is flagged as
    /// non-equilibrium.
    pub equilibrium_tol: f64,
}

impl Default for LinearizeOptions {
    fn default() -> Self {
        LinearizeOptions {
            h_state: 1e-6,
            h_input: 1e-9,
            equilibrium_tol: 1e-6,
        }
    }
}

/// x_dot ~= A (x - x*) + B (u - u*) + f(x*, u*).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub a: DMatrix<f64>, // 12 x 12
    pub b: DMatrix<f64>, // 12 x 4
    pub x_star: State12,
    pub u_star: ThrusterCommand,
    /// Whether f(x*, u*) vanished within tolerance. Linearizing elsewhere is
    /// allowed, but downstream reports carry the flag.
    pub at_equilibrium: bool,
    pub residual_norm: f64,
}

/// Central-difference linearization of the full rigid-body dynamics.
pub fn linearize(
    x_star: &State12,
    u_star: &ThrusterCommand,
    inertial: &InertialConfig,
    opts: &LinearizeOptions,
) -> Result<LinearSystem, SimError> {
    inertial.validate()?;
    if !(opts.h_state > 0.0 && opts.h_input > 0.0) {
        return Err(SimError::InvalidConfig(
            "finite-difference steps must be positive".into(),
        ));
    }

    let mut a = DMatrix::zeros(STATE_DIM, STATE_DIM);
    for j in 0..STATE_DIM {
        let mut xp = x_star.to_array();
        let mut xm = x_star.to_array();
        xp[j] += opts.h_state;
        xm[j] -= opts.h_state;
        let fp = derivative(&State12::from_array(xp), u_star, inertial)?.to_array();
        let fm = derivative(&State12::from_array(xm), u_star, inertial)?.to_array();
        for i in 0..STATE_DIM {
            a[(i, j)] = (fp[i] - fm[i]) / (2.0 * opts.h_state);
        }
    }

    let mut b = DMatrix::zeros(STATE_DIM, 4);
    for j in 0..4 {
        let mut up = u_star.to_array();
        let mut um = u_star.to_array();
        up[j] += opts.h_input;
        um[j] -= opts.h_input;
        let fp = derivative(x_star, &ThrusterCommand::from_array(up), inertial)?.to_array();
        let fm = derivative(x_star, &ThrusterCommand::from_array(um), inertial)?.to_array();
        for i in 0..STATE_DIM {
            b[(i, j)] = (fp[i] - fm[i]) / (2.0 * opts.h_input);
        }
    }

    let residual = derivative(x_star, u_star, inertial)?.to_array();
    let residual_norm = residual.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(LinearSystem {
        a,
        b,
        x_star: *x_star,
        u_star: *u_star,
        at_equilibrium: residual_norm <= opts.equilibrium_tol,
        residual_norm,
    })
}

/// Kalman controllability matrix [B, AB, ..., A^(n-1) B].
pub fn controllability_matrix(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let m = b.ncols();
    let mut ctrb = DMatrix::zeros(n, n * m);
    let mut block = b.clone();
    for k in 0..n {
        ctrb.view_mut((0, k * m), (n, m)).copy_from(&block);
        block = a * &block;
    }
    ctrb
}

/// Rank decision and uncontrollable directions for one linearized system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllabilityReport {
    pub n: usize,
    pub rank: usize,
    /// Relative singular-value cutoff used for the rank decision.
    pub tolerance: f64,
    pub singular_values: Vec<f64>,
    /// Orthonormal basis of the uncontrollable subspace (left null space of
    /// the controllability matrix), one n-vector per lost rank.
    pub uncontrollable_basis: Vec<Vec<f64>>,
    pub state_labels: Vec<String>,
    /// Norm of each state axis' projection onto the uncontrollable subspace;
    /// ~1 means the axis is unreachable, ~0 means fully controllable.
    pub axis_uncontrollability: Vec<f64>,
    pub at_equilibrium: bool,
}

impl ControllabilityReport {
    /// Projection of a single state axis onto the uncontrollable subspace.
    pub fn axis_projection(&self, axis: usize) -> f64 {
        self.axis_uncontrollability[axis]
    }
}

/// SVD-based controllability analysis. `tolerance` is relative: singular
/// values above `tolerance * sigma_max` count toward the rank.
pub fn analyze(
    system: &LinearSystem,
    labels: &[&str],
    tolerance: f64,
) -> Result<ControllabilityReport, SimError> {
    let n = system.a.nrows();
    if labels.len() != n {
        return Err(SimError::InvalidConfig(format!(
            "{} labels for an n = {n} system",
            labels.len()
        )));
    }
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(SimError::InvalidConfig(format!(
            "rank tolerance must lie in (0, 1), got {tolerance}"
        )));
    }
    let ctrb = controllability_matrix(&system.a, &system.b);
    let svd = ctrb.svd(true, false);
    let sigma = svd.singular_values.as_slice().to_vec();
    let sigma_max = sigma.iter().cloned().fold(0.0f64, f64::max);
    let rank = sigma.iter().filter(|s| **s > tolerance * sigma_max).count();
    let u = svd.u.expect("left singular vectors requested");

    let mut basis = Vec::with_capacity(n - rank);
    for k in rank..n {
        basis.push(u.column(k).iter().cloned().collect::<Vec<f64>>());
    }
    let axis_uncontrollability = (0..n)
        .map(|axis| {
            basis
                .iter()
                .map(|v| v[axis] * v[axis])
                .sum::<f64>()
                .sqrt()
        })
        .collect();

    Ok(ControllabilityReport {
        n,
        rank,
        tolerance,
        singular_values: sigma,
        uncontrollable_basis: basis,
        state_labels: labels.iter().map(|s| s.to_string()).collect(),
        axis_uncontrollability,
        at_equilibrium: system.at_equilibrium,
    })
}

/// Full-vehicle controllability at a hover-like point, labeled with the
/// 12-state names. The headline numbers: rank 10 of 12, with yaw angle and
/// yaw rate spanning the uncontrollable pair.
pub fn analyze_yaw(system: &LinearSystem, tolerance: f64) -> Result<ControllabilityReport, SimError> {
    analyze(system, &STATE_LABELS, tolerance)
}
