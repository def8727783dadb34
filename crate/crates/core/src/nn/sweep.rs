use std::collections::BTreeMap;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::nn::dataset::Dataset;
use crate::nn::mlp::{MlpModel, MlpShape};
use crate::nn::train::{train, TrainConfig, TrainReport};
use crate::optimizers::OptimizerKind;

/// Learning-rate sweep over several optimizers from a shared initialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub shape: MlpShape,
    pub init_scale: f64,
    pub init_seed: u64,
    pub optimizers: Vec<OptimizerKind>,
    pub rates: Vec<f64>,
    /// Applied to every optimizer that accepts the key.
    pub hyperparams: BTreeMap<String, f64>,
    pub epochs: usize,
    pub batch_size: usize,
    pub shuffle_seed: u64,
    pub divergence_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub optimizer: OptimizerKind,
    pub r: f64,
    pub report: TrainReport,
}

impl SweepSpec {
    fn config(&self, kind: OptimizerKind, r: f64) -> TrainConfig {
        let mut cfg = TrainConfig::new(kind, self.epochs, self.batch_size, self.shuffle_seed)
            .with("r", r)
            .threshold(self.divergence_threshold);
        for (k, v) in &self.hyperparams {
            if kind.accepts(k) && k != "r" {
                cfg = cfg.with(k, *v);
            }
        }
        cfg
    }
}

/// Trains every (optimizer, rate) pair on its own thread. Results come back
/// in optimizer-major, rate-minor order regardless of scheduling.
pub fn run_sweep(spec: &SweepSpec, data: &Dataset) -> Result<Vec<SweepPoint>> {
    let init = MlpModel::init(spec.shape, spec.init_scale, spec.init_seed)?;
    let jobs: Vec<(OptimizerKind, f64)> = spec
        .optimizers
        .iter()
        .flat_map(|k| spec.rates.iter().map(move |r| (*k, *r)))
        .collect();
    thread::scope(|s| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(kind, r)| {
                let mut model = init.clone();
                let cfg = spec.config(kind, r);
                s.spawn(move || {
                    train(&mut model, data, &cfg).map(|report| SweepPoint {
                        optimizer: kind,
                        r,
                        report,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("training thread panicked"))
            .collect()
    })
}

/// Best final accuracy of `kind` over its non-diverged sweep points.
pub fn best_accuracy(points: &[SweepPoint], kind: OptimizerKind) -> Option<f64> {
    points
        .iter()
        .filter(|p| p.optimizer == kind && !p.report.diverged)
        .filter_map(|p| p.report.final_accuracy())
        .fold(None, |best, a| Some(best.map_or(a, |b: f64| b.max(a))))
}
