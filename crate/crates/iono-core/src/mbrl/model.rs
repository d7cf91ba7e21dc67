//! The learned dynamics model: a delta-predicting MLP plus the normalization
//! it was trained under, serializable to a stable JSON schema.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::MbrlError;
use crate::mbrl::dataset::{Dataset, Normalization, INPUT_DIM, OUTPUT_DIM};
use crate::mbrl::nn::{Adam, Mlp, MlpDims, Workspace};
use crate::seeds;
use crate::state::{State12, ThrusterCommand};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Training hyperparameters. The defaults are the tuned values used throughout
/// the experiments; `hidden` trades accuracy against planner throughput.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainHyper {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub hidden: usize,
    pub seed: u64,
}

impl Default for TrainHyper {
    fn default() -> Self {
        TrainHyper {
            epochs: 17,
            learning_rate: 0.0025,
            batch_size: 18,
            hidden: 64,
            seed: 0,
        }
    }
}

impl TrainHyper {
    pub fn validate(&self) -> Result<(), MbrlError> {
        if self.epochs == 0 || self.batch_size == 0 || self.hidden == 0 {
            return Err(MbrlError::InvalidConfig(
                "epochs, batch_size, and hidden must be positive".into(),
            ));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(MbrlError::InvalidConfig(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// Serialized network: x_next = x + denormalize(net(normalize(x, u))).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsModel {
    pub format_version: u32,
    pub layer_dims: Vec<usize>, // [16, hidden, hidden, 12]
    pub activation: String,     // "relu"
    /// Row-major weight matrices, one per layer.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub normalization: Normalization,
    pub seed: u64,
}

impl DynamicsModel {
    fn from_mlp(mlp: &Mlp, normalization: Normalization, seed: u64) -> DynamicsModel {
        let d = mlp.dims;
        let [w1, b1, w2, b2, w3, b3] = d.offsets();
        let p = &mlp.params;
        DynamicsModel {
            format_version: MODEL_FORMAT_VERSION,
            layer_dims: vec![d.input, d.hidden, d.hidden, d.output],
            activation: "relu".into(),
            weights: vec![p[w1..b1].to_vec(), p[w2..b2].to_vec(), p[w3..b3].to_vec()],
            biases: vec![p[b1..w2].to_vec(), p[b2..w3].to_vec(), p[b3..].to_vec()],
            normalization,
            seed,
        }
    }

    pub fn hidden(&self) -> usize {
        self.layer_dims[1]
    }

    pub fn validate(&self) -> Result<(), MbrlError> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(MbrlError::BadModelShape(format!(
                "format_version {} (expected {MODEL_FORMAT_VERSION})",
                self.format_version
            )));
        }
        let d = &self.layer_dims;
        if d.len() != 4 || d[0] != INPUT_DIM || d[3] != OUTPUT_DIM || d[1] != d[2] || d[1] == 0 {
            return Err(MbrlError::BadModelShape(format!("layer_dims {d:?}")));
        }
        if self.activation != "relu" {
            return Err(MbrlError::BadModelShape(format!(
                "activation {:?}",
                self.activation
            )));
        }
        if self.weights.len() != 3 || self.biases.len() != 3 {
            return Err(MbrlError::BadModelShape(
                "expected 3 weight and 3 bias layers".into(),
            ));
        }
        for l in 0..3 {
            if self.weights[l].len() != d[l + 1] * d[l] || self.biases[l].len() != d[l + 1] {
                return Err(MbrlError::BadModelShape(format!("layer {l} size")));
            }
        }
        let finite = self
            .weights
            .iter()
            .chain(self.biases.iter())
            .flat_map(|v| v.iter())
            .all(|p| p.is_finite());
        if !finite || !self.normalization.is_finite() {
            return Err(MbrlError::NonFiniteWeights);
        }
        Ok(())
    }

    /// One-step prediction. Scratch-free callers pay two small allocations; the
    /// planner's inner loop uses [`predict_into`](Self::predict_into).
    pub fn predict(
        &self,
        x: &State12,
        u: &ThrusterCommand,
    ) -> Result<State12, MbrlError> {
        let mut scratch = PredictScratch::new(self.hidden());
        self.predict_into(x, u, &mut scratch)
    }

    pub fn predict_into(
        &self,
        x: &State12,
        u: &ThrusterCommand,
        scratch: &mut PredictScratch,
    ) -> Result<State12, MbrlError> {
        let mut input = [0.0; INPUT_DIM];
        self.normalization.normalize_input(x, u, &mut input);

        let h = self.hidden();
        scratch.ensure(h);
        let PredictScratch { a1, a2 } = scratch;
        let mut z = [0.0; OUTPUT_DIM];
        forward_layer(&self.weights[0], &self.biases[0], &input, a1, true);
        forward_layer(&self.weights[1], &self.biases[1], a1, a2, true);
        forward_layer(&self.weights[2], &self.biases[2], a2, &mut z, false);

        let mut delta = [0.0; OUTPUT_DIM];
        self.normalization.denormalize_output(&z, &mut delta);
        let next = x.add_scaled(&State12::from_array(delta), 1.0);
        if !next.is_finite() {
            return Err(MbrlError::NonFinitePrediction);
        }
        Ok(next)
    }

    /// Compose the model over an open-loop action sequence; returns the state
    /// after each action.
    pub fn rollout_predict(
        &self,
        x0: &State12,
        actions: &[ThrusterCommand],
    ) -> Result<Vec<State12>, MbrlError> {
        let mut scratch = PredictScratch::new(self.hidden());
        let mut states = Vec::with_capacity(actions.len());
        let mut x = *x0;
        for u in actions {
            x = self.predict_into(&x, u, &mut scratch)?;
            states.push(x);
        }
        Ok(states)
    }

    pub fn save_json(&self, path: &Path) -> Result<(), std::io::Error> {
        let body = serde_json::to_string_pretty(self).expect("model serializes");
        fs::write(path, body + "\n")
    }

    pub fn load_json(path: &Path) -> Result<DynamicsModel, MbrlError> {
        let body = fs::read_to_string(path)
            .map_err(|e| MbrlError::BadModelShape(format!("read {}: {e}", path.display())))?;
        let model: DynamicsModel = serde_json::from_str(&body)
            .map_err(|e| MbrlError::BadModelShape(format!("parse {}: {e}", path.display())))?;
        model.validate()?;
        Ok(model)
    }
}

/// Hidden activation buffers for repeated predictions.
#[derive(Debug, Clone)]
pub struct PredictScratch {
    a1: Vec<f64>,
    a2: Vec<f64>,
}

impl PredictScratch {
    pub fn new(hidden: usize) -> PredictScratch {
        PredictScratch {
            a1: vec![0.0; hidden],
            a2: vec![0.0; hidden],
        }
    }

    fn ensure(&mut self, hidden: usize) {
        self.a1.resize(hidden, 0.0);
        self.a2.resize(hidden, 0.0);
    }
}

fn forward_layer(w: &[f64], b: &[f64], x: &[f64], out: &mut [f64], relu: bool) {
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

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub model: DynamicsModel,
    /// Mean minibatch MSE per epoch, in normalized target units.
    pub epoch_losses: Vec<f64>,
}

/// Train a fresh delta model on the full dataset.
///
/// Normalization is recomputed from the dataset on every call. Each epoch
/// shuffles the sample order (seeded), then walks minibatches of
/// `batch_size` (the final short batch is included). One seed fixes
/// initialization, shuffling, and therefore the final parameters exactly.
pub fn train(dataset: &Dataset, hyper: &TrainHyper) -> Result<TrainReport, MbrlError> {
    hyper.validate()?;
    if dataset.len() < hyper.batch_size {
        return Err(MbrlError::DatasetTooSmall {
            len: dataset.len(),
            need: hyper.batch_size,
        });
    }

    let normalization = Normalization::fit(dataset);
    let n = dataset.len();
    let mut inputs = vec![0.0; n * INPUT_DIM];
    let mut targets = vec![0.0; n * OUTPUT_DIM];
    for (s, t) in dataset.transitions().iter().enumerate() {
        let raw_in = Dataset::input_row(t);
        let raw_out = Dataset::target_row(t);
        for i in 0..INPUT_DIM {
            inputs[s * INPUT_DIM + i] =
                (raw_in[i] - normalization.in_mean[i]) / normalization.in_std[i];
        }
        let mut z = [0.0; OUTPUT_DIM];
        normalization.normalize_target(&raw_out, &mut z);
        targets[s * OUTPUT_DIM..(s + 1) * OUTPUT_DIM].copy_from_slice(&z);
    }

    let dims = MlpDims {
        input: INPUT_DIM,
        hidden: hyper.hidden,
        output: OUTPUT_DIM,
    };
    let mut rng = seeds::rng(hyper.seed);
    let mut mlp = Mlp::init(dims, &mut rng);
    let mut opt = Adam::new(hyper.learning_rate, dims.num_params());
    let mut grad = vec![0.0; dims.num_params()];
    let mut ws = Workspace::default();

    let mut order: Vec<usize> = (0..n).collect();
    let mut batch_in = vec![0.0; hyper.batch_size * INPUT_DIM];
    let mut batch_out = vec![0.0; hyper.batch_size * OUTPUT_DIM];
    let mut epoch_losses = Vec::with_capacity(hyper.epochs);

    for _epoch in 0..hyper.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(hyper.batch_size) {
            let b = chunk.len();
            for (row, &s) in chunk.iter().enumerate() {
                batch_in[row * INPUT_DIM..(row + 1) * INPUT_DIM]
                    .copy_from_slice(&inputs[s * INPUT_DIM..(s + 1) * INPUT_DIM]);
                batch_out[row * OUTPUT_DIM..(row + 1) * OUTPUT_DIM]
                    .copy_from_slice(&targets[s * OUTPUT_DIM..(s + 1) * OUTPUT_DIM]);
            }
            let loss = mlp.loss_and_grad(
                &batch_in[..b * INPUT_DIM],
                &batch_out[..b * OUTPUT_DIM],
                b,
                &mut grad,
                &mut ws,
            );
            opt.step(&mut mlp.params, &grad);
            loss_sum += loss * b as f64;
        }
        epoch_losses.push(loss_sum / n as f64);
    }

    let model = DynamicsModel::from_mlp(&mlp, normalization, hyper.seed);
    model.validate()?;
    Ok(TrainReport {
        model,
        epoch_losses,
    })
}
