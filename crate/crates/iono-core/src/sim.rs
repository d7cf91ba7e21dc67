//! Closed-loop simulation: fixed-step dynamics under a zero-order-hold control,
//! with additive Gaussian state noise and an attitude stop condition.

use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::{InertialConfig, Integrator, SimConfig};
use crate::dynamics::derivative;
use crate::error::SimError;
use crate::state::{State12, ThrusterCommand, STATE_DIM};

/// One dynamics substep under a held command.
pub fn step_dynamics(
    x: &State12,
    u: &ThrusterCommand,
    dt: f64,
    integrator: Integrator,
    inertial: &InertialConfig,
) -> Result<State12, SimError> {
    let next = match integrator {
        Integrator::Euler => {
            let k = derivative(x, u, inertial)?;
            x.add_scaled(&k, dt)
        }
        Integrator::Rk4 => {
            let k1 = derivative(x, u, inertial)?;
            let k2 = derivative(&x.add_scaled(&k1, dt / 2.0), u, inertial)?;
            let k3 = derivative(&x.add_scaled(&k2, dt / 2.0), u, inertial)?;
            let k4 = derivative(&x.add_scaled(&k3, dt), u, inertial)?;
            let mut acc = x.add_scaled(&k1, dt / 6.0);
            acc = acc.add_scaled(&k2, dt / 3.0);
            acc = acc.add_scaled(&k3, dt / 3.0);
            acc.add_scaled(&k4, dt / 6.0)
        }
    };
    if !next.is_finite() {
        return Err(SimError::NonFiniteState);
    }
    Ok(next)
}

/// Result of advancing one control period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub next_state: State12,
    /// Stop condition (|theta| or |phi| above `stop_angle`) held at entry or at
    /// some dynamics substep of this period.
    pub crashed: bool,
    /// Simulated time actually covered, <= control_period; less when the stop
    /// condition fires mid-period.
    pub elapsed: f64,
}

fn stopped(x: &State12, stop_angle: f64) -> bool {
    x.theta.abs() > stop_angle || x.phi.abs() > stop_angle
}

/// Advance one control period under a held command.
///
/// The command is clamped into `[0, f_max]` before integration (callers can
/// inspect the clamp themselves; `rollout` counts and logs it). Noise is drawn
/// once per period after the substeps, or after every substep when
/// `noise_every_substep` is set; a crashed period returns before any draw, so
/// a trajectory consumes RNG state only for the periods it completes.
pub fn step_control_period(
    x: &State12,
    u: &ThrusterCommand,
    sim: &SimConfig,
    inertial: &InertialConfig,
    rng: &mut ChaCha12Rng,
) -> Result<StepOutcome, SimError> {
    if stopped(x, sim.stop_angle) {
        return Ok(StepOutcome {
            next_state: *x,
            crashed: true,
            elapsed: 0.0,
        });
    }
    let (u, _) = u.clamped(sim.f_max);
    let noise = if sim.noise_sigma > 0.0 {
        Some(Normal::new(0.0, sim.noise_sigma).map_err(|e| {
            SimError::InvalidConfig(format!("noise_sigma {}: {e}", sim.noise_sigma))
        })?)
    } else {
        None
    };

    let mut state = *x;
    let substeps = sim.substeps();
    for k in 0..substeps {
        state = step_dynamics(&state, &u, sim.dt_dynamics, sim.integrator, inertial)?;
        if sim.noise_every_substep {
            if let Some(n) = noise {
                state = add_noise(&state, n, rng);
            }
        }
        if stopped(&state, sim.stop_angle) {
            return Ok(StepOutcome {
                next_state: state,
                crashed: true,
                elapsed: (k + 1) as f64 * sim.dt_dynamics,
            });
        }
    }
    if !sim.noise_every_substep {
        if let Some(n) = noise {
            state = add_noise(&state, n, rng);
        }
    }
    Ok(StepOutcome {
        next_state: state,
        crashed: false,
        elapsed: sim.control_period,
    })
}

fn add_noise(x: &State12, noise: Normal<f64>, rng: &mut ChaCha12Rng) -> State12 {
    let mut a = x.to_array();
    for v in a.iter_mut().take(STATE_DIM) {
        *v += noise.sample(rng);
    }
    State12::from_array(a)
}

/// Per-control-step record within a trial. `state` is the state the action was
/// chosen in; `reward` is evaluated on the resulting state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepLog {
    pub t: f64, // s, at the start of the step
    pub state: State12,
    pub action: ThrusterCommand,
    pub reward: f64,
}

/// A completed closed-loop trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub log: Vec<StepLog>,
    pub final_state: State12,
    pub crashed: bool,
    pub elapsed: f64, // s
    pub episode_reward: f64,
    /// Control steps on which the commanded forces had to be clamped.
    pub clamped_steps: usize,
}

impl TrialRecord {
    pub fn steps(&self) -> usize {
        self.log.len()
    }

    /// Mean yaw rate over the trial, signed, in deg/s.
    pub fn yaw_rate_deg_s(&self) -> f64 {
        if self.elapsed > 0.0 {
            self.final_state.psi.to_degrees() / self.elapsed
        } else {
            0.0
        }
    }
}

/// Run a closed-loop trial for up to `max_steps` control periods, stopping
/// early on the attitude stop condition. The policy sees the control step
/// index and the current state; `reward`, when given, scores each successor
/// state and accumulates into `episode_reward`.
pub fn rollout(
    x0: &State12,
    mut policy: impl FnMut(usize, &State12) -> ThrusterCommand,
    max_steps: usize,
    sim: &SimConfig,
    inertial: &InertialConfig,
    rng: &mut ChaCha12Rng,
    reward: Option<&dyn Fn(&State12) -> f64>,
) -> Result<TrialRecord, SimError> {
    if max_steps == 0 {
        return Err(SimError::EmptyRollout);
    }
    sim.validate()?;
    inertial.validate()?;

    let mut record = TrialRecord {
        log: Vec::with_capacity(max_steps),
        final_state: *x0,
        crashed: false,
        elapsed: 0.0,
        episode_reward: 0.0,
        clamped_steps: 0,
    };
    let mut state = *x0;
    for step in 0..max_steps {
        let action = policy(step, &state);
        let (_, clamped) = action.clamped(sim.f_max);
        if clamped {
            if record.clamped_steps == 0 {
                log::warn!(
                    "thruster command {:?} outside [0, {}] at step {step}; clamping",
                    action.to_array(),
                    sim.f_max
                );
            }
            record.clamped_steps += 1;
        }
        let out = step_control_period(&state, &action, sim, inertial, rng)?;
        if out.elapsed == 0.0 {
            // Stop condition already held at entry; nothing was simulated.
            record.crashed = true;
            break;
        }
        let r = reward.map_or(0.0, |f| f(&out.next_state));
        record.log.push(StepLog {
            t: record.elapsed,
            state,
            action,
            reward: r,
        });
        record.episode_reward += r;
        record.elapsed += out.elapsed;
        state = out.next_state;
        record.final_state = state;
        if out.crashed {
            record.crashed = true;
            break;
        }
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds;
    use approx::assert_relative_eq;

    fn quiet(sim: &SimConfig) -> SimConfig {
        SimConfig {
            noise_sigma: 0.0,
            ..*sim
        }
    }

    #[test]
    fn euler_matches_closed_form_free_fall() {
        // Pure vertical: v(t) = (F/m - g) t under forward Euler is exact because
        // the acceleration is constant.
        let inertial = InertialConfig::default();
        let sim = quiet(&SimConfig::default());
        let u = ThrusterCommand::uniform(0.0);
        let mut rng = seeds::rng(0);
        let out = step_control_period(&State12::zero(), &u, &sim, &inertial, &mut rng).unwrap();
        assert!(!out.crashed);
        assert_relative_eq!(out.next_state.vz, -9.81 * 0.01, max_relative = 1e-12);
    }

    #[test]
    fn rk4_converges_at_fourth_order_on_attitude_spin() {
        // Then-vs-half-step Richardson on a trajectory with active gyroscopic
        // coupling; the error ratio should be near 2^4.
        let inertial = InertialConfig {
            ixx: 2.0e-7,
            iyy: 1.0e-7,
            izz: 3.0e-7,
            ..InertialConfig::default()
        };
        let x0 = State12 {
            wx: 3.0,
            wy: -2.0,
            wz: 1.0,
            vx: 0.1,
            ..State12::zero()
        };
        let u = ThrusterCommand::uniform(1.0e-4);
        let horizon = 0.2;
        let run = |n: usize, integ: Integrator| -> State12 {
            let dt = horizon / n as f64;
            let mut x = x0;
            for _ in 0..n {
                x = step_dynamics(&x, &u, dt, integ, &inertial).unwrap();
            }
            x
        };
        let err = |a: &State12, b: &State12| -> f64 {
            a.to_array()
                .iter()
                .zip(b.to_array())
                .map(|(p, q)| (p - q).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        let reference = run(51200, Integrator::Rk4);
        let e1 = err(&run(100, Integrator::Rk4), &reference);
        let e2 = err(&run(200, Integrator::Rk4), &reference);
        let order = (e1 / e2).log2();
        assert!(order > 3.5, "observed RK4 order {order}");

        let f1 = err(&run(400, Integrator::Euler), &reference);
        let f2 = err(&run(800, Integrator::Euler), &reference);
        let order1 = (f1 / f2).log2();
        assert!(order1 > 0.8 && order1 < 1.2, "observed Euler order {order1}");
    }

    #[test]
    fn crash_at_entry_reports_immediately() {
        let x = State12 {
            phi: 46.0_f64.to_radians(),
            ..State12::zero()
        };
        let sim = SimConfig::default();
        let mut rng = seeds::rng(0);
        let out = step_control_period(
            &x,
            &ThrusterCommand::uniform(0.0),
            &sim,
            &InertialConfig::default(),
            &mut rng,
        )
        .unwrap();
        assert!(out.crashed);
        assert_eq!(out.elapsed, 0.0);
        assert_eq!(out.next_state, x);
    }

    #[test]
    fn crash_mid_period_stops_at_the_offending_substep() {
        // Strong roll torque from rest; the stop must fire inside one period
        // with elapsed a multiple of dt strictly below the control period.
        // alpha = l (f2 + f3) / ixx = 6e4 rad/s^2 crosses 45 deg near 5 ms.
        let inertial = InertialConfig {
            ixx: 1.0e-10,
            iyy: 1.0e-10,
            izz: 2.0e-10,
            ..InertialConfig::default()
        };
        let sim = quiet(&SimConfig::default());
        let u = ThrusterCommand::from_array([0.0, 0.3e-3, 0.3e-3, 0.0]);
        let mut rng = seeds::rng(0);
        let out = step_control_period(&State12::zero(), &u, &sim, &inertial, &mut rng).unwrap();
        assert!(out.crashed);
        assert!(out.elapsed > 0.0 && out.elapsed < sim.control_period);
        let substeps = (out.elapsed / sim.dt_dynamics).round();
        assert_relative_eq!(out.elapsed, substeps * sim.dt_dynamics, max_relative = 1e-12);
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let sim = SimConfig::default();
        let inertial = InertialConfig::default();
        let u = ThrusterCommand::uniform(inertial.hover_force());
        let run = || {
            let mut rng = seeds::rng(7);
            let mut x = State12::zero();
            for _ in 0..50 {
                x = step_control_period(&x, &u, &sim, &inertial, &mut rng)
                    .unwrap()
                    .next_state;
            }
            x
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn noise_perturbs_every_dimension() {
        let sim = SimConfig::default();
        let inertial = InertialConfig::default();
        let u = ThrusterCommand::uniform(inertial.hover_force());
        let mut rng = seeds::rng(3);
        let out =
            step_control_period(&State12::zero(), &u, &sim, &inertial, &mut rng).unwrap();
        // At hover the drift is ~0, so what remains is the injected noise.
        let a = out.next_state.to_array();
        assert!(a.iter().all(|v| v.abs() > 0.0 && v.abs() < 0.1));
    }

    #[test]
    fn rollout_hover_stays_up_without_noise() {
        let sim = quiet(&SimConfig::default());
        let inertial = InertialConfig::default();
        let hover = ThrusterCommand::uniform(inertial.hover_force());
        let mut rng = seeds::rng(0);
        let rec = rollout(
            &State12::zero(),
            |_, _| hover,
            200,
            &sim,
            &inertial,
            &mut rng,
            None,
        )
        .unwrap();
        assert!(!rec.crashed);
        assert_eq!(rec.steps(), 200);
        assert_relative_eq!(rec.elapsed, 2.0, max_relative = 1e-9);
        assert!(rec.final_state.z.abs() < 1e-9);
    }

    #[test]
    fn rollout_counts_clamped_steps_and_accumulates_reward() {
        let sim = quiet(&SimConfig::default());
        let inertial = InertialConfig::default();
        let big = ThrusterCommand::uniform(1.0); // far above f_max
        let mut rng = seeds::rng(0);
        let reward = |_: &State12| 1.0;
        let rec = rollout(
            &State12::zero(),
            |_, _| big,
            10,
            &sim,
            &inertial,
            &mut rng,
            Some(&reward),
        )
        .unwrap();
        assert_eq!(rec.clamped_steps, 10);
        assert_relative_eq!(rec.episode_reward, 10.0, max_relative = 1e-12);
    }

    #[test]
    fn rollout_from_crashed_state_is_empty() {
        let x = State12 {
            theta: 1.0,
            ..State12::zero()
        };
        let mut rng = seeds::rng(0);
        let rec = rollout(
            &x,
            |_, _| ThrusterCommand::uniform(0.0),
            10,
            &SimConfig::default(),
            &InertialConfig::default(),
            &mut rng,
            None,
        )
        .unwrap();
        assert!(rec.crashed);
        assert_eq!(rec.steps(), 0);
        assert_eq!(rec.elapsed, 0.0);
    }

    #[test]
    fn zero_steps_is_an_error() {
        let mut rng = seeds::rng(0);
        let e = rollout(
            &State12::zero(),
            |_, _| ThrusterCommand::uniform(0.0),
            0,
            &SimConfig::default(),
            &InertialConfig::default(),
            &mut rng,
            None,
        );
        assert!(matches!(e, Err(SimError::EmptyRollout)));
    }
}
