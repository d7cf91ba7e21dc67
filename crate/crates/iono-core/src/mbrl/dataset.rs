//! Transition storage and feature normalization.
//!
//! The model learns state deltas, not absolute next states: inputs are
//! (state, action) pairs, targets are x_next - x. Storage snaps each incoming
//! next state so that the round trip x + (x_next - x) reproduces the stored
//! successor bit-for-bit; training and prediction then agree exactly on what a
//! target means.

use serde::{Deserialize, Serialize};

use crate::state::{State12, ThrusterCommand, STATE_DIM};

pub const INPUT_DIM: usize = STATE_DIM + 4;
pub const OUTPUT_DIM: usize = STATE_DIM;

/// Per-feature standard deviations are floored here so constant features
/// normalize to zero instead of dividing by zero.
pub const STD_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: State12,
    pub action: ThrusterCommand,
    pub next_state: State12,
    pub reward: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    transitions: Vec<Transition>,
}

impl Dataset {
    pub fn new() -> Self {
        Dataset::default()
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Store a transition, snapping `next_state` to the nearest value exactly
    /// reconstructible as `state + (next_state - state)`. The adjustment is at
    /// most an ulp per component.
    pub fn push(
        &mut self,
        state: State12,
        action: ThrusterCommand,
        next_state: State12,
        reward: f64,
    ) {
        let s = state.to_array();
        let mut n = next_state.to_array();
        for i in 0..STATE_DIM {
            for _ in 0..8 {
                let recon = s[i] + (n[i] - s[i]);
                if recon == n[i] {
                    break;
                }
                n[i] = recon;
            }
            debug_assert_eq!(s[i] + (n[i] - s[i]), n[i]);
        }
        self.transitions.push(Transition {
            state,
            action,
            next_state: State12::from_array(n),
            reward,
        });
    }

    /// Model input features for one transition.
    pub fn input_row(t: &Transition) -> [f64; INPUT_DIM] {
        let mut row = [0.0; INPUT_DIM];
        row[..STATE_DIM].copy_from_slice(&t.state.to_array());
        row[STATE_DIM..].copy_from_slice(&t.action.to_array());
        row
    }

    /// Training target: the state delta.
    pub fn target_row(t: &Transition) -> [f64; OUTPUT_DIM] {
        let s = t.state.to_array();
        let n = t.next_state.to_array();
        let mut row = [0.0; OUTPUT_DIM];
        for i in 0..OUTPUT_DIM {
            row[i] = n[i] - s[i];
        }
        row
    }
}

/// Feature-wise affine normalization, recomputed from scratch on every
/// training call so it always reflects the full dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub in_mean: Vec<f64>,  // INPUT_DIM
    pub in_std: Vec<f64>,   // INPUT_DIM, floored
    pub out_mean: Vec<f64>, // OUTPUT_DIM
    pub out_std: Vec<f64>,  // OUTPUT_DIM, floored
}

impl Normalization {
    pub fn fit(dataset: &Dataset) -> Normalization {
        let n = dataset.len().max(1) as f64;
        let mut in_mean = vec![0.0; INPUT_DIM];
        let mut out_mean = vec![0.0; OUTPUT_DIM];
        for t in dataset.transitions() {
            let x = Dataset::input_row(t);
            let y = Dataset::target_row(t);
            for i in 0..INPUT_DIM {
                in_mean[i] += x[i];
            }
            for i in 0..OUTPUT_DIM {
                out_mean[i] += y[i];
            }
        }
        for m in in_mean.iter_mut() {
            *m /= n;
        }
        for m in out_mean.iter_mut() {
            *m /= n;
        }
        let mut in_var = vec![0.0; INPUT_DIM];
        let mut out_var = vec![0.0; OUTPUT_DIM];
        for t in dataset.transitions() {
            let x = Dataset::input_row(t);
            let y = Dataset::target_row(t);
            for i in 0..INPUT_DIM {
                in_var[i] += (x[i] - in_mean[i]).powi(2);
            }
            for i in 0..OUTPUT_DIM {
                out_var[i] += (y[i] - out_mean[i]).powi(2);
            }
        }
        let std_of = |v: f64| ((v / n).sqrt()).max(STD_FLOOR);
        Normalization {
            in_mean,
            in_std: in_var.into_iter().map(std_of).collect(),
            out_mean,
            out_std: out_var.into_iter().map(std_of).collect(),
        }
    }

    pub fn normalize_input(&self, state: &State12, action: &ThrusterCommand, out: &mut [f64]) {
        debug_assert_eq!(out.len(), INPUT_DIM);
        let s = state.to_array();
        let a = action.to_array();
        for i in 0..STATE_DIM {
            out[i] = (s[i] - self.in_mean[i]) / self.in_std[i];
        }
        for i in 0..4 {
            out[STATE_DIM + i] =
                (a[i] - self.in_mean[STATE_DIM + i]) / self.in_std[STATE_DIM + i];
        }
    }

    pub fn normalize_target(&self, target: &[f64; OUTPUT_DIM], out: &mut [f64]) {
        for i in 0..OUTPUT_DIM {
            out[i] = (target[i] - self.out_mean[i]) / self.out_std[i];
        }
    }

    /// Map a normalized network output back to a raw state delta.
    pub fn denormalize_output(&self, z: &[f64], out: &mut [f64; OUTPUT_DIM]) {
        for i in 0..OUTPUT_DIM {
            out[i] = z[i] * self.out_std[i] + self.out_mean[i];
        }
    }

    pub fn is_finite(&self) -> bool {
        self.in_mean.iter().all(|v| v.is_finite())
            && self.in_std.iter().all(|v| v.is_finite() && *v > 0.0)
            && self.out_mean.iter().all(|v| v.is_finite())
            && self.out_std.iter().all(|v| v.is_finite() && *v > 0.0)
    }
}
