//! Stage-1 classifier: a five-class multilayer perceptron with a softmax
//! output, trained by mini-batch SGD on mean cross-entropy with optional L2.
//!
//! Everything is deterministic: weight init and batch shuffling both run on
//! seeded ChaCha streams, and accumulation order is fixed, so identical
//! (data, config, seed) reproduce identical weights bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Label;

#[derive(Debug, Error)]
pub enum MlpError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("loss became non-finite at epoch {epoch}")]
    NonFinite { epoch: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
}

/// Row-major dense matrix; serialized flat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }

    /// y = W x + b
    fn affine(&self, x: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = b.to_vec();
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let mut acc = 0.0;
            for (w, v) in row.iter().zip(x) {
                acc += w * v;
            }
            out[r] += acc;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.05,
            batch_size: 64,
            epochs: 30,
            seed: 0,
            l2: 1e-4,
        }
    }
}

pub const NUM_CLASSES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layer_sizes: Vec<usize>,
    pub weights: Vec<Mat>,
    pub biases: Vec<Vec<f64>>,
    pub hidden_activation: Activation,
    pub rng_seed: u64,
}

/// Initializes a network with weights drawn from U(-1/sqrt(fan_in),
/// 1/sqrt(fan_in)) and zero biases. At least one hidden layer is required
/// and the output layer is the five traffic classes.
pub fn init(layer_sizes: &[usize], activation: Activation, seed: u64) -> Result<MlpModel, MlpError> {
    if layer_sizes.len() < 3 {
        return Err(MlpError::Shape(format!(
            "need input, at least one hidden, and output layer; got {layer_sizes:?}"
        )));
    }
    if layer_sizes.iter().any(|&s| s == 0) {
        return Err(MlpError::Shape("layer sizes must be >= 1".into()));
    }
    if *layer_sizes.last().unwrap() != NUM_CLASSES {
        return Err(MlpError::Shape(format!(
            "output layer must have {NUM_CLASSES} units, got {}",
            layer_sizes.last().unwrap()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for pair in layer_sizes.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let scale = 1.0 / (fan_in as f64).sqrt();
        let mut w = Mat::zeros(fan_out, fan_in);
        for v in &mut w.data {
            *v = (rng.random::<f64>() * 2.0 - 1.0) * scale;
        }
        weights.push(w);
        biases.push(vec![0.0; fan_out]);
    }
    Ok(MlpModel {
        layer_sizes: layer_sizes.to_vec(),
        weights,
        biases,
        hidden_activation: activation,
        rng_seed: seed,
    })
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

impl MlpModel {
    pub fn input_size(&self) -> usize {
        self.layer_sizes[0]
    }

    fn activate(&self, z: &mut [f64]) {
        match self.hidden_activation {
            Activation::Relu => {
                for v in z.iter_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            Activation::Tanh => {
                for v in z.iter_mut() {
                    *v = v.tanh();
                }
            }
        }
    }

    /// Runs the network and keeps every layer's post-activation output
    /// (index 0 is the input itself).
    fn forward_trace(&self, x: &[f64]) -> Result<Vec<Vec<f64>>, MlpError> {
        if x.len() != self.input_size() {
            return Err(MlpError::Shape(format!(
                "input has {} features, network expects {}",
                x.len(),
                self.input_size()
            )));
        }
        let mut outputs = vec![x.to_vec()];
        let last = self.weights.len() - 1;
        for (i, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = w.affine(outputs.last().unwrap(), b);
            if i < last {
                self.activate(&mut z);
            } else {
                z = softmax(&z);
            }
            outputs.push(z);
        }
        Ok(outputs)
    }

    /// Class probability vector (softmax over the output logits).
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, MlpError> {
        Ok(self.forward_trace(x)?.pop().unwrap())
    }

    /// Argmax class; ties go to the lowest class index.
    pub fn predict(&self, x: &[f64]) -> Result<(Label, Vec<f64>), MlpError> {
        let probs = self.forward(x)?;
        let mut best = 0;
        for (i, &p) in probs.iter().enumerate() {
            if p > probs[best] {
                best = i;
            }
        }
        Ok((Label::from_index(best).unwrap(), probs))
    }

    /// Mean cross-entropy over the batch plus the L2 penalty
    /// (l2/2 * sum of squared weights).
    pub fn objective(&self, xs: &[Vec<f64>], ys: &[usize], l2: f64) -> Result<f64, MlpError> {
        let mut ce = 0.0;
        for (x, &y) in xs.iter().zip(ys) {
            let probs = self.forward(x)?;
            ce -= probs[y].max(1e-300).ln();
        }
        ce /= xs.len() as f64;
        let penalty: f64 = self
            .weights
            .iter()
            .flat_map(|w| w.data.iter())
            .map(|w| w * w)
            .sum();
        Ok(ce + 0.5 * l2 * penalty)
    }

    /// Backpropagation over a batch: returns the objective value and the
    /// gradients of it with respect to every weight matrix and bias vector.
    pub fn gradients(
        &self,
        xs: &[Vec<f64>],
        ys: &[usize],
        l2: f64,
    ) -> Result<(f64, Vec<Mat>, Vec<Vec<f64>>), MlpError> {
        let layers = self.weights.len();
        let mut grad_w: Vec<Mat> = self
            .weights
            .iter()
            .map(|w| Mat::zeros(w.rows, w.cols))
            .collect();
        let mut grad_b: Vec<Vec<f64>> = self.biases.iter().map(|b| vec![0.0; b.len()]).collect();
        let scale = 1.0 / xs.len() as f64;
        let mut ce = 0.0;

        for (x, &y) in xs.iter().zip(ys) {
            let outputs = self.forward_trace(x)?;
            let probs = outputs.last().unwrap();
            ce -= probs[y].max(1e-300).ln();
            // softmax + cross-entropy: delta = p - onehot(y)
            let mut delta: Vec<f64> = probs.clone();
            delta[y] -= 1.0;
            for layer in (0..layers).rev() {
                let input = &outputs[layer];
                for (r, d) in delta.iter().enumerate() {
                    let gw = &mut grad_w[layer].data[r * input.len()..(r + 1) * input.len()];
                    for (g, v) in gw.iter_mut().zip(input) {
                        *g += scale * d * v;
                    }
                    grad_b[layer][r] += scale * d;
                }
                if layer == 0 {
                    break;
                }
                // propagate through the weight matrix and the activation
                let w = &self.weights[layer];
                let mut prev = vec![0.0; w.cols];
                for (r, d) in delta.iter().enumerate() {
                    let row = &w.data[r * w.cols..(r + 1) * w.cols];
                    for (p, wv) in prev.iter_mut().zip(row) {
                        *p += d * wv;
                    }
                }
                match self.hidden_activation {
                    Activation::Relu => {
                        for (p, a) in prev.iter_mut().zip(input) {
                            if *a <= 0.0 {
                                *p = 0.0;
                            }
                        }
                    }
                    Activation::Tanh => {
                        for (p, a) in prev.iter_mut().zip(input) {
                            *p *= 1.0 - a * a;
                        }
                    }
                }
                delta = prev;
            }
        }
        ce *= scale;
        let mut penalty = 0.0;
        for (gw, w) in grad_w.iter_mut().zip(&self.weights) {
            for (g, v) in gw.data.iter_mut().zip(&w.data) {
                *g += l2 * v;
                penalty += v * v;
            }
        }
        Ok((ce + 0.5 * l2 * penalty, grad_w, grad_b))
    }

    /// Mini-batch SGD. Returns the per-epoch loss history: the mean training
    /// objective over each epoch's batches, evaluated before each update.
    pub fn train(
        &mut self,
        xs: &[Vec<f64>],
        labels: &[Label],
        cfg: &TrainConfig,
    ) -> Result<Vec<f64>, MlpError> {
        if xs.len() != labels.len() {
            return Err(MlpError::Shape(format!(
                "{} inputs vs {} labels",
                xs.len(),
                labels.len()
            )));
        }
        if xs.is_empty() {
            return Err(MlpError::Config("training set is empty".into()));
        }
        let mut seen = [false; NUM_CLASSES];
        for l in labels {
            seen[l.index()] = true;
        }
        if seen.iter().filter(|&&s| s).count() < 2 {
            return Err(MlpError::Config("labels must cover at least 2 classes".into()));
        }
        if cfg.learning_rate < 0.0 {
            return Err(MlpError::Config("learning rate must be >= 0".into()));
        }
        if cfg.batch_size == 0 || cfg.epochs == 0 {
            return Err(MlpError::Config("batch size and epochs must be >= 1".into()));
        }
        if cfg.l2 < 0.0 {
            return Err(MlpError::Config("l2 must be >= 0".into()));
        }
        let ys: Vec<usize> = labels.iter().map(|l| l.index()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(crate::derive_seed(cfg.seed, "mlp-batches"));
        let mut order: Vec<usize> = (0..xs.len()).collect();
        let mut history = Vec::with_capacity(cfg.epochs);
        let mut batch_x: Vec<Vec<f64>> = Vec::with_capacity(cfg.batch_size);
        let mut batch_y: Vec<usize> = Vec::with_capacity(cfg.batch_size);

        for epoch in 0..cfg.epochs {
            use rand::seq::SliceRandom;
            order.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            let mut samples = 0usize;
            for chunk in order.chunks(cfg.batch_size) {
                batch_x.clear();
                batch_y.clear();
                for &i in chunk {
                    batch_x.push(xs[i].clone());
                    batch_y.push(ys[i]);
                }
                let (loss, grad_w, grad_b) = self.gradients(&batch_x, &batch_y, cfg.l2)?;
                epoch_loss += loss * chunk.len() as f64;
                samples += chunk.len();
                for ((w, gw), (b, gb)) in self
                    .weights
                    .iter_mut()
                    .zip(&grad_w)
                    .zip(self.biases.iter_mut().zip(&grad_b))
                {
                    for (v, g) in w.data.iter_mut().zip(&gw.data) {
                        *v -= cfg.learning_rate * g;
                    }
                    for (v, g) in b.iter_mut().zip(gb) {
                        *v -= cfg.learning_rate * g;
                    }
                }
            }
            let mean = epoch_loss / samples as f64;
            if !mean.is_finite() {
                return Err(MlpError::NonFinite { epoch });
            }
            history.push(mean);
        }
        Ok(history)
    }

    pub fn training_accuracy(&self, xs: &[Vec<f64>], labels: &[Label]) -> Result<f64, MlpError> {
        let mut hits = 0usize;
        for (x, l) in xs.iter().zip(labels) {
            if self.predict(x)?.0 == *l {
                hits += 1;
            }
        }
        Ok(hits as f64 / xs.len() as f64)
    }
}
