//! A small fully-connected network, written out by hand.
//!
//! Two ReLU hidden layers, linear output, flat parameter vector (so the
//! optimizer and serialization can treat parameters uniformly), and a
//! deterministic batched backward pass. Nothing here is generic: the planner
//! needs millions of fast forward evaluations per trial and a bit-reproducible
//! training loop, not a framework.

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::error::MbrlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MlpDims {
    pub input: usize,
    pub hidden: usize,
    pub output: usize,
}

impl MlpDims {
    pub fn num_params(&self) -> usize {
        let MlpDims {
            input: i,
            hidden: h,
            output: o,
        } = *self;
        h * i + h + h * h + h + o * h + o
    }

    /// Offsets of (w1, b1, w2, b2, w3, b3) in the flat parameter vector.
    /// Weight matrices are row-major [out][in].
    pub fn offsets(&self) -> [usize; 6] {
        let MlpDims {
            input: i,
            hidden: h,
            output: o,
        } = *self;
        let w1 = 0;
        let b1 = w1 + h * i;
        let w2 = b1 + h;
        let b2 = w2 + h * h;
        let w3 = b2 + h;
        let b3 = w3 + o * h;
        debug_assert_eq!(b3 + o, self.num_params());
        [w1, b1, w2, b2, w3, b3]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub dims: MlpDims,
    pub params: Vec<f64>,
}

/// `out[j] = b[j] + w[j] . x`, optionally through ReLU. Row-major weights keep
/// each dot product on a contiguous slice.
fn layer_forward(w: &[f64], b: &[f64], x: &[f64], out: &mut [f64], relu: bool) {
    let n_in = x.len();
    for (j, o) in out.iter_mut().enumerate() {
        let row = &w[j * n_in..(j + 1) * n_in];
        let mut acc = b[j];
        for (wi, xi) in row.iter().zip(x.iter()) {
            acc += wi * xi;
        }
        *o = if relu && acc < 0.0 { 0.0 } else { acc };
    }
}

impl Mlp {
    /// Uniform fan-in initialization: every weight and bias of a layer is drawn
    /// from U(-1/sqrt(fan_in), 1/sqrt(fan_in)), layers in order, weights before
    /// biases. The draw order is part of the reproducibility contract.
    pub fn init(dims: MlpDims, rng: &mut ChaCha12Rng) -> Mlp {
        let mut params = vec![0.0; dims.num_params()];
        let [w1, b1, w2, b2, w3, b3] = dims.offsets();
        let spans = [
            (w1, b1, dims.input),  // w1
            (b1, w2, dims.input),  // b1
            (w2, b2, dims.hidden), // w2
            (b2, w3, dims.hidden), // b2
            (w3, b3, dims.hidden), // w3
            (b3, dims.num_params(), dims.hidden), // b3
        ];
        for (start, end, fan_in) in spans {
            let bound = 1.0 / (fan_in as f64).sqrt();
            for p in params[start..end].iter_mut() {
                *p = rng.random_range(-bound..bound);
            }
        }
        Mlp { dims, params }
    }

    pub fn from_params(dims: MlpDims, params: Vec<f64>) -> Result<Mlp, MbrlError> {
        if params.len() != dims.num_params() {
            return Err(MbrlError::BadModelShape(format!(
                "{} parameters for dims {dims:?}",
                params.len()
            )));
        }
        Ok(Mlp { dims, params })
    }

    /// Forward pass for one input. `a1` and `a2` receive the post-ReLU hidden
    /// activations (callers reuse the buffers across calls).
    pub fn forward(&self, x: &[f64], a1: &mut [f64], a2: &mut [f64], out: &mut [f64]) {
        let [w1, b1, w2, b2, w3, b3] = self.dims.offsets();
        let p = &self.params;
        layer_forward(&p[w1..b1], &p[b1..w2], x, a1, true);
        layer_forward(&p[w2..b2], &p[b2..w3], a1, a2, true);
        layer_forward(&p[w3..b3], &p[b3..], a2, out, false);
    }

    /// Mean squared error over a batch and its gradient with respect to every
    /// parameter. `inputs` and `targets` are batch-major flat slices. The
    /// gradient buffer is overwritten. Samples are accumulated in order, so
    /// the result is identical from run to run.
    pub fn loss_and_grad(
        &self,
        inputs: &[f64],
        targets: &[f64],
        batch: usize,
        grad: &mut [f64],
        ws: &mut Workspace,
    ) -> f64 {
        let MlpDims {
            input: ni,
            hidden: nh,
            output: no,
        } = self.dims;
        debug_assert_eq!(inputs.len(), batch * ni);
        debug_assert_eq!(targets.len(), batch * no);
        debug_assert_eq!(grad.len(), self.dims.num_params());
        grad.fill(0.0);
        ws.ensure(self.dims);

        let [w1o, b1o, w2o, b2o, w3o, b3o] = self.dims.offsets();
        let p = &self.params;
        let scale = 1.0 / (batch * no) as f64;
        let mut loss = 0.0;

        for s in 0..batch {
            let x = &inputs[s * ni..(s + 1) * ni];
            let y = &targets[s * no..(s + 1) * no];
            let Workspace {
                a1, a2, out, d1, d2, d3, ..
            } = ws;
            layer_forward(&p[w1o..b1o], &p[b1o..w2o], x, a1, true);
            layer_forward(&p[w2o..b2o], &p[b2o..w3o], a1, a2, true);
            layer_forward(&p[w3o..b3o], &p[b3o..], a2, out, false);

            for k in 0..no {
                let e = out[k] - y[k];
                loss += e * e * scale;
                d3[k] = 2.0 * e * scale;
            }

            // Output layer gradients and backprop into layer 2.
            d2.fill(0.0);
            for k in 0..no {
                let gw = &mut grad[w3o + k * nh..w3o + (k + 1) * nh];
                let w = &p[w3o + k * nh..w3o + (k + 1) * nh];
                for j in 0..nh {
                    gw[j] += d3[k] * a2[j];
                    d2[j] += w[j] * d3[k];
                }
                grad[b3o + k] += d3[k];
            }
            for j in 0..nh {
                if a2[j] <= 0.0 {
                    d2[j] = 0.0;
                }
            }

            d1.fill(0.0);
            for j in 0..nh {
                if d2[j] != 0.0 {
                    let gw = &mut grad[w2o + j * nh..w2o + (j + 1) * nh];
                    let w = &p[w2o + j * nh..w2o + (j + 1) * nh];
                    for i in 0..nh {
                        gw[i] += d2[j] * a1[i];
                        d1[i] += w[i] * d2[j];
                    }
                    grad[b2o + j] += d2[j];
                }
            }
            for i in 0..nh {
                if a1[i] <= 0.0 {
                    d1[i] = 0.0;
                }
            }

            for j in 0..nh {
                if d1[j] != 0.0 {
                    let gw = &mut grad[w1o + j * ni..w1o + (j + 1) * ni];
                    for i in 0..ni {
                        gw[i] += d1[j] * x[i];
                    }
                    grad[b1o + j] += d1[j];
                }
            }
        }
        loss
    }
}

/// Scratch buffers for forward/backward passes.
#[derive(Debug, Default, Clone)]
pub struct Workspace {
    a1: Vec<f64>,
    a2: Vec<f64>,
    out: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    d3: Vec<f64>,
}

impl Workspace {
    fn ensure(&mut self, dims: MlpDims) {
        self.a1.resize(dims.hidden, 0.0);
        self.a2.resize(dims.hidden, 0.0);
        self.out.resize(dims.output, 0.0);
        self.d1.resize(dims.hidden, 0.0);
        self.d2.resize(dims.hidden, 0.0);
        self.d3.resize(dims.output, 0.0);
    }
}

/// Adam with bias correction over the flat parameter vector.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(lr: f64, num_params: usize) -> Adam {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        debug_assert_eq!(params.len(), self.m.len());
        self.t += 1;
        let b1t = 1.0 - self.beta1.powi(self.t as i32);
        let b2t = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let mhat = self.m[i] / b1t;
            let vhat = self.v[i] / b2t;
            params[i] -= self.lr * mhat / (vhat.sqrt() + self.eps);
        }
    }
}

/// Maximum relative disagreement between the analytic gradient and central
/// differences with step `h`, over every parameter. Relative scale is
/// max(1, |analytic|, |numeric|) per parameter.
pub fn gradient_check(mlp: &Mlp, inputs: &[f64], targets: &[f64], batch: usize, h: f64) -> f64 {
    let mut ws = Workspace::default();
    let mut grad = vec![0.0; mlp.dims.num_params()];
    mlp.loss_and_grad(inputs, targets, batch, &mut grad, &mut ws);

    let mut probe = mlp.clone();
    let mut scratch = vec![0.0; mlp.dims.num_params()];
    let mut worst = 0.0f64;
    for i in 0..probe.params.len() {
        let orig = probe.params[i];
        probe.params[i] = orig + h;
        let lp = probe.loss_and_grad(inputs, targets, batch, &mut scratch, &mut ws);
        probe.params[i] = orig - h;
        let lm = probe.loss_and_grad(inputs, targets, batch, &mut scratch, &mut ws);
        probe.params[i] = orig;
        let numeric = (lp - lm) / (2.0 * h);
        let denom = 1.0f64.max(numeric.abs()).max(grad[i].abs());
        worst = worst.max((numeric - grad[i]).abs() / denom);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds;
    use rand::Rng;

    fn random_batch(
        dims: MlpDims,
        batch: usize,
        rng: &mut ChaCha12Rng,
    ) -> (Vec<f64>, Vec<f64>) {
        let inputs: Vec<f64> = (0..batch * dims.input)
            .map(|_| rng.random_range(-1.5..1.5))
            .collect();
        let targets: Vec<f64> = (0..batch * dims.output)
            .map(|_| rng.random_range(-1.5..1.5))
            .collect();
        (inputs, targets)
    }

    #[test]
    fn init_respects_fan_in_bounds() {
        let dims = MlpDims {
            input: 16,
            hidden: 25,
            output: 12,
        };
        let mlp = Mlp::init(dims, &mut seeds::rng(1));
        let [w1, b1, w2, ..] = dims.offsets();
        let bound1 = 1.0 / (dims.input as f64).sqrt();
        assert!(mlp.params[w1..b1].iter().all(|p| p.abs() < bound1));
        let bound2 = 1.0 / (dims.hidden as f64).sqrt();
        assert!(mlp.params[w2..].iter().all(|p| p.abs() < bound2));
        // Not degenerate: values actually spread out.
        let mean: f64 = mlp.params.iter().sum::<f64>() / mlp.params.len() as f64;
        assert!(mean.abs() < 0.05);
    }

    #[test]
    fn forward_matches_hand_computation() {
        // 1-2-1 network with fixed parameters.
        let dims = MlpDims {
            input: 1,
            hidden: 2,
            output: 1,
        };
        // w1 = [[1], [-1]], b1 = [0.5, 0.5], w2 = [[1,0],[0,1]], b2 = [0,0],
        // w3 = [[2, 3]], b3 = [-1].
        let params = vec![
            1.0, -1.0, // w1
            0.5, 0.5, // b1
            1.0, 0.0, 0.0, 1.0, // w2
            0.0, 0.0, // b2
            2.0, 3.0, // w3
            -1.0, // b3
        ];
        let mlp = Mlp::from_params(dims, params).unwrap();
        let mut a1 = [0.0; 2];
        let mut a2 = [0.0; 2];
        let mut out = [0.0; 1];
        // x = 2: h1 = relu([2.5, -1.5]) = [2.5, 0]; h2 = [2.5, 0];
        // y = 2*2.5 + 3*0 - 1 = 4.
        mlp.forward(&[2.0], &mut a1, &mut a2, &mut out);
        assert_eq!(out[0], 4.0);
        assert_eq!(a1, [2.5, 0.0]);
    }

    #[test]
    fn analytic_gradient_matches_central_differences() {
        let dims = MlpDims {
            input: 5,
            hidden: 8,
            output: 3,
        };
        let mut rng = seeds::rng(7);
        let mlp = Mlp::init(dims, &mut rng);
        let (inputs, targets) = random_batch(dims, 6, &mut rng);
        let worst = gradient_check(&mlp, &inputs, &targets, 6, 1e-6);
        assert!(worst < 1e-4, "max relative gradient error {worst}");
    }

    #[test]
    fn gradient_is_deterministic() {
        let dims = MlpDims {
            input: 4,
            hidden: 6,
            output: 2,
        };
        let mut rng = seeds::rng(3);
        let mlp = Mlp::init(dims, &mut rng);
        let (inputs, targets) = random_batch(dims, 5, &mut rng);
        let mut ws = Workspace::default();
        let mut g1 = vec![0.0; dims.num_params()];
        let mut g2 = vec![0.0; dims.num_params()];
        let l1 = mlp.loss_and_grad(&inputs, &targets, 5, &mut g1, &mut ws);
        let l2 = mlp.loss_and_grad(&inputs, &targets, 5, &mut g2, &mut ws);
        assert_eq!(l1, l2);
        assert_eq!(g1, g2);
    }

    #[test]
    fn adam_descends_a_quadratic() {
        // Minimize ||p||^2 by feeding Adam the exact gradient 2p.
        let mut params = vec![1.0, -2.0, 3.0];
        let mut opt = Adam::new(0.05, 3);
        for _ in 0..400 {
            let grad: Vec<f64> = params.iter().map(|p| 2.0 * p).collect();
            opt.step(&mut params, &grad);
        }
        assert!(params.iter().all(|p| p.abs() < 1e-2), "{params:?}");
    }

    #[test]
    fn single_sgd_like_step_reduces_batch_loss() {
        let dims = MlpDims {
            input: 6,
            hidden: 10,
            output: 4,
        };
        let mut rng = seeds::rng(12);
        let mut mlp = Mlp::init(dims, &mut rng);
        let (inputs, targets) = random_batch(dims, 8, &mut rng);
        let mut ws = Workspace::default();
        let mut grad = vec![0.0; dims.num_params()];
        let before = mlp.loss_and_grad(&inputs, &targets, 8, &mut grad, &mut ws);
        let mut opt = Adam::new(0.01, dims.num_params());
        opt.step(&mut mlp.params, &grad);
        let after = mlp.loss_and_grad(&inputs, &targets, 8, &mut grad, &mut ws);
        assert!(after < before, "loss went {before} -> {after}");
    }
}
