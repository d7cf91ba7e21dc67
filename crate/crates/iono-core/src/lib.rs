//! Flight dynamics and control experiments for a four-thruster electrohydrodynamic
//! microrobot. The vehicle has no yaw torque authority: the thrusters share a
//! common polarity, so the mixer's z-torque row is identically zero. Yaw motion
//! is still reachable through the Lie bracket of the roll and pitch axes, and the
//! planner modules here exploit that, either with a fixed phased maneuver or with
//! a learned dynamics model driving a sampling-based MPC.
//!
//! Everything internal is SI (meters, kilograms, seconds, radians). Degrees and
//! milli-newtons appear only at the edges, in configs and report summaries.

pub mod analysis;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod lie;
pub mod mbrl;
pub mod rotation;
pub mod seeds;
pub mod sim;
pub mod state;
pub mod thrust;

pub use config::{InertialConfig, Integrator, SimConfig, ThrustParams};
pub use error::SimError;
pub use state::{State12, ThrusterCommand, STATE_DIM, STATE_LABELS};
