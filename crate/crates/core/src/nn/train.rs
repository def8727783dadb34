use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::dataset::Dataset;
use crate::nn::mlp::{forward_backward_at, MlpModel};
use crate::optimizers::{OptimizerKind, OptimizerState};
use crate::run::DEFAULT_DIVERGENCE_THRESHOLD;

pub const RNG_ALGORITHM: &str = "ChaCha8Rng";
pub const RNG_SEEDING: &str = "seed_from_u64";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub optimizer: OptimizerKind,
    pub hyperparams: BTreeMap<String, f64>,
    pub epochs: usize,
    pub batch_size: usize,
    /// Seeds the per-epoch shuffle.
    pub seed: u64,
    /// Training stops once any weight exceeds this magnitude.
    pub divergence_threshold: f64,
}

impl TrainConfig {
    pub fn new(optimizer: OptimizerKind, epochs: usize, batch_size: usize, seed: u64) -> Self {
        TrainConfig {
            optimizer,
            hyperparams: BTreeMap::new(),
            epochs,
            batch_size,
            seed,
            divergence_threshold: DEFAULT_DIVERGENCE_THRESHOLD,
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.hyperparams.insert(key.to_string(), value);
        self
    }

    pub fn threshold(mut self, divergence_threshold: f64) -> Self {
        self.divergence_threshold = divergence_threshold;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    /// Mean cross-entropy over the dataset after each epoch.
    pub loss_curve: Vec<f64>,
    pub accuracy_curve: Vec<f64>,
    pub diverged: bool,
    /// Epoch (1-based) during which training stopped.
    pub diverged_epoch: Option<usize>,
    /// Largest |weight| seen after any update.
    pub peak_abs_param: f64,
    pub rng_algorithm: &'static str,
    pub rng_seeding: &'static str,
    pub seed: u64,
}

impl TrainReport {
    pub fn final_accuracy(&self) -> Option<f64> {
        self.accuracy_curve.last().copied()
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.loss_curve.last().copied()
    }
}

/// Minibatch training. Each epoch is one pass over a fresh shuffle drawn
/// from a single ChaCha8 stream; optimizer state carries across batches.
/// Nesterov evaluates its lookahead gradient on the same batch.
pub fn train(model: &mut MlpModel, data: &Dataset, config: &TrainConfig) -> Result<TrainReport> {
    if config.batch_size == 0 {
        return Err(Error::Config("batch_size must be at least 1".into()));
    }
    if config.epochs == 0 {
        return Err(Error::Config("epochs must be at least 1".into()));
    }
    if !(config.divergence_threshold > 0.0) {
        return Err(Error::Config("divergence_threshold must be positive".into()));
    }
    if data.dim() != model.shape().inputs || data.classes() != model.shape().classes {
        return Err(Error::Config(format!(
            "dataset ({} inputs, {} classes) does not fit model {:?}",
            data.dim(),
            data.classes(),
            model.shape()
        )));
    }
    let shape = model.shape();
    let mut state = OptimizerState::from_map(config.optimizer, &config.hyperparams, shape.param_count())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut params = model.params().clone();
    let mut report = TrainReport {
        loss_curve: Vec::with_capacity(config.epochs),
        accuracy_curve: Vec::with_capacity(config.epochs),
        diverged: false,
        diverged_epoch: None,
        peak_abs_param: params.max_abs(),
        rng_algorithm: RNG_ALGORITHM,
        rng_seeding: RNG_SEEDING,
        seed: config.seed,
    };

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let probe = state.eval_point(&params);
            let (loss, grad) = forward_backward_at(shape, &probe, data, batch);
            if !loss.is_finite() {
                report.diverged = true;
                break;
            }
            params = state.step(&params, &grad).0;
            let peak = params.max_abs();
            report.peak_abs_param = report.peak_abs_param.max(peak);
            if !(peak <= config.divergence_threshold) {
                report.diverged = true;
                break;
            }
        }
        model.set_params(params.clone());
        let (loss, acc) = model.evaluate(data);
        report.loss_curve.push(loss);
        report.accuracy_curve.push(acc);
        if report.diverged || !loss.is_finite() {
            report.diverged = true;
            report.diverged_epoch = Some(epoch);
            break;
        }
    }
    Ok(report)
}
