use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::dataset::Dataset;
use crate::vector::ParamVector;

/// Layer sizes. `hidden == 0` is multinomial logistic regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpShape {
    pub inputs: usize,
    pub hidden: usize,
    pub classes: usize,
}

impl MlpShape {
    pub fn new(inputs: usize, hidden: usize, classes: usize) -> Result<Self> {
        if inputs == 0 {
            return Err(Error::Config("model needs at least one input".into()));
        }
        if classes < 2 {
            return Err(Error::Config(format!("model needs at least 2 classes, got {classes}")));
        }
        Ok(MlpShape {
            inputs,
            hidden,
            classes,
        })
    }

    /// Width feeding the output layer.
    fn feature_dim(&self) -> usize {
        if self.hidden == 0 {
            self.inputs
        } else {
            self.hidden
        }
    }

    pub fn param_count(&self) -> usize {
        let first = if self.hidden == 0 {
            0
        } else {
            self.hidden * self.inputs + self.hidden
        };
        first + self.classes * self.feature_dim() + self.classes
    }

    // offsets of W2 and b2 in the flattened vector
    fn output_offsets(&self) -> (usize, usize) {
        let w2 = if self.hidden == 0 {
            0
        } else {
            self.hidden * self.inputs + self.hidden
        };
        (w2, w2 + self.classes * self.feature_dim())
    }
}

/// One-hidden-layer tanh network with softmax output.
///
/// Parameters are flattened as `W1` (row-major, H×D), `b1`, `W2` (row-major,
/// C×H), `b2`. Without a hidden layer only `W` (C×D) and `b` remain.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    shape: MlpShape,
    params: ParamVector,
}

impl MlpModel {
    pub fn zeros(shape: MlpShape) -> Self {
        MlpModel {
            shape,
            params: ParamVector::zeros(shape.param_count()),
        }
    }

    /// Parameters drawn i.i.d. from N(0, scale²) with a ChaCha8 stream.
    pub fn init(shape: MlpShape, scale: f64, seed: u64) -> Result<Self> {
        let normal = Normal::new(0.0, scale).map_err(|e| Error::Config(format!("bad init scale {scale}: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = (0..shape.param_count())
            .map(|_| normal.sample(&mut rng))
            .collect::<Vec<_>>();
        Ok(MlpModel {
            shape,
            params: ParamVector::from(params),
        })
    }

    pub fn from_params(shape: MlpShape, params: ParamVector) -> Result<Self> {
        if params.dim() != shape.param_count() {
            return Err(Error::DimensionMismatch {
                expected: shape.param_count(),
                got: params.dim(),
            });
        }
        Ok(MlpModel { shape, params })
    }

    pub fn shape(&self) -> MlpShape {
        self.shape
    }

    pub fn params(&self) -> &ParamVector {
        &self.params
    }

    pub fn set_params(&mut self, params: ParamVector) {
        assert_eq!(params.dim(), self.shape.param_count());
        self.params = params;
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        let mut features = Vec::new();
        logits_at(self.shape, self.params.as_slice(), x, &mut features)
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.logits(x))
    }

    /// Fraction of correctly classified rows.
    pub fn accuracy(&self, data: &Dataset) -> f64 {
        let hits = (0..data.len())
            .filter(|&i| self.predict(data.input(i)) == data.label(i))
            .count();
        hits as f64 / data.len() as f64
    }

    /// Mean cross-entropy and accuracy over the whole dataset.
    pub fn evaluate(&self, data: &Dataset) -> (f64, f64) {
        let mut features = Vec::new();
        let mut loss = 0.0;
        let mut hits = 0;
        for i in 0..data.len() {
            let z = logits_at(self.shape, self.params.as_slice(), data.input(i), &mut features);
            loss += log_sum_exp(&z) - z[data.label(i)];
            if argmax(&z) == data.label(i) {
                hits += 1;
            }
        }
        (loss / data.len() as f64, hits as f64 / data.len() as f64)
    }
}

/// First index of the largest logit; NaN logits never win.
fn argmax(z: &[f64]) -> usize {
    let mut best = 0;
    for (c, v) in z.iter().enumerate().skip(1) {
        if *v > z[best] || z[best].is_nan() {
            best = c;
        }
    }
    best
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Output logits; `features` receives the hidden activations (or the input).
fn logits_at(shape: MlpShape, p: &[f64], x: &[f64], features: &mut Vec<f64>) -> Vec<f64> {
    let d = shape.inputs;
    features.clear();
    if shape.hidden == 0 {
        features.extend_from_slice(x);
    } else {
        let (w1, b1) = p.split_at(shape.hidden * d);
        for j in 0..shape.hidden {
            let row = &w1[j * d..(j + 1) * d];
            let a = b1[j] + row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>();
            features.push(a.tanh());
        }
    }
    let f = shape.feature_dim();
    let (w2_at, b2_at) = shape.output_offsets();
    let w2 = &p[w2_at..b2_at];
    let b2 = &p[b2_at..];
    (0..shape.classes)
        .map(|c| {
            b2[c]
                + w2[c * f..(c + 1) * f]
                    .iter()
                    .zip(features.iter())
                    .map(|(w, h)| w * h)
                    .sum::<f64>()
        })
        .collect()
}

/// Mean softmax cross-entropy over `batch` rows of `data` and its exact
/// gradient at `params`.
pub fn forward_backward_at(
    shape: MlpShape,
    params: &ParamVector,
    data: &Dataset,
    batch: &[usize],
) -> (f64, ParamVector) {
    assert!(!batch.is_empty(), "batch must be non-empty");
    assert_eq!(params.dim(), shape.param_count());
    assert_eq!(data.dim(), shape.inputs);
    let p = params.as_slice();
    let d = shape.inputs;
    let f = shape.feature_dim();
    let (w2_at, b2_at) = shape.output_offsets();
    let mut grad = vec![0.0; shape.param_count()];
    let mut features = Vec::with_capacity(f);
    let mut dz = vec![0.0; shape.classes];
    let mut loss = 0.0;

    for &i in batch {
        let x = data.input(i);
        let y = data.label(i);
        let z = logits_at(shape, p, x, &mut features);
        let lse = log_sum_exp(&z);
        loss += lse - z[y];
        for c in 0..shape.classes {
            dz[c] = (z[c] - lse).exp() - if c == y { 1.0 } else { 0.0 };
        }
        for c in 0..shape.classes {
            let row = &mut grad[w2_at + c * f..w2_at + (c + 1) * f];
            for (g, h) in row.iter_mut().zip(&features) {
                *g += dz[c] * h;
            }
            grad[b2_at + c] += dz[c];
        }
        if shape.hidden > 0 {
            let b1_at = shape.hidden * d;
            for j in 0..shape.hidden {
                let dh: f64 = (0..shape.classes).map(|c| dz[c] * p[w2_at + c * f + j]).sum();
                let da = dh * (1.0 - features[j] * features[j]);
                for (g, xk) in grad[j * d..(j + 1) * d].iter_mut().zip(x) {
                    *g += da * xk;
                }
                grad[b1_at + j] += da;
            }
        }
    }
    let n = batch.len() as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    (loss / n, ParamVector::from(grad))
}

/// [`forward_backward_at`] at the model's own parameters.
pub fn forward_backward(model: &MlpModel, data: &Dataset, batch: &[usize]) -> (f64, ParamVector) {
    forward_backward_at(model.shape, &model.params, data, batch)
}
