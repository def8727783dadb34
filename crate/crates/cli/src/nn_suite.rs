//! Learning-rate robustness sweeps on the small MLP.
//!
//! ```toml
//! config_version = 1
//! name = "nn_sweep"
//! optimizers = ["sgd", "mom", "nag", "spi"]
//! rates = [0.05, 0.1, 0.2, 0.4, 0.8, 1.6]
//!
//! [dataset]
//! kind = "gaussians"
//! n_per_class = 200
//! dim = 2
//! separation = 4.0
//! seed = 3
//!
//! [model]
//! hidden = 8
//!
//! [training]
//! epochs = 30
//! batch_size = 32
//!
//! [hyperparams]
//! alpha = 0.99
//! ```
//!
//! `kind = "idx"` reads `images` and `labels` paths (relative to the config
//! file) with an optional `limit`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use spiopt_core::nn::{load_idx, run_sweep, synth_gaussians, Dataset, MlpShape, SweepPoint, SweepSpec};
use spiopt_core::{Error, OptimizerKind, Result};

use crate::config::{check_label, check_version, read_toml};
use crate::output::{fmt_f64, fmt_opt, write_csv};

pub const ROBUSTNESS_FILE: &str = "robustness.csv";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetConfig {
    Gaussians {
        n_per_class: usize,
        dim: usize,
        separation: f64,
        #[serde(default)]
        seed: u64,
    },
    Idx {
        images: PathBuf,
        labels: PathBuf,
        #[serde(default)]
        limit: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default)]
    pub hidden: usize,
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
    #[serde(default)]
    pub init_seed: u64,
}

fn default_init_scale() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub batch_size: usize,
    #[serde(default)]
    pub shuffle_seed: u64,
    #[serde(default = "default_nn_threshold")]
    pub divergence_threshold: f64,
}

fn default_nn_threshold() -> f64 {
    spiopt_core::DEFAULT_DIVERGENCE_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NnConfig {
    pub config_version: u32,
    pub name: String,
    pub optimizers: Vec<String>,
    pub rates: Vec<f64>,
    pub dataset: DatasetConfig,
    pub model: ModelConfig,
    pub training: TrainingConfig,
    #[serde(default)]
    pub hyperparams: BTreeMap<String, f64>,
    #[serde(default)]
    pub csv_dir: Option<PathBuf>,
}

impl NnConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let mut cfg: NnConfig = read_toml(path)?;
        if let DatasetConfig::Idx { images, labels, .. } = &mut cfg.dataset {
            let base = path.parent().unwrap_or(Path::new("."));
            *images = base.join(&*images);
            *labels = base.join(&*labels);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: NnConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_version(self.config_version)?;
        check_label(&self.name)?;
        if self.optimizers.is_empty() || self.rates.is_empty() {
            return Err(Error::Config("need at least one optimizer and one rate".into()));
        }
        self.kinds()?;
        if let Some(r) = self.rates.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(Error::Config(format!("rates must be positive, got {r}")));
        }
        if self.training.epochs == 0 || self.training.batch_size == 0 {
            return Err(Error::Config("epochs and batch_size must be at least 1".into()));
        }
        Ok(())
    }

    pub fn kinds(&self) -> Result<Vec<OptimizerKind>> {
        self.optimizers.iter().map(|s| s.parse()).collect()
    }

    pub fn load_dataset(&self) -> Result<Dataset> {
        match &self.dataset {
            DatasetConfig::Gaussians {
                n_per_class,
                dim,
                separation,
                seed,
            } => synth_gaussians(*n_per_class, *dim, *separation, *seed),
            DatasetConfig::Idx { images, labels, limit } => load_idx(images, labels, *limit),
        }
    }

    pub fn sweep_spec(&self, data: &Dataset) -> Result<SweepSpec> {
        Ok(SweepSpec {
            shape: MlpShape::new(data.dim(), self.model.hidden, data.classes())?,
            init_scale: self.model.init_scale,
            init_seed: self.model.init_seed,
            optimizers: self.kinds()?,
            rates: self.rates.clone(),
            hyperparams: self.hyperparams.clone(),
            epochs: self.training.epochs,
            batch_size: self.training.batch_size,
            shuffle_seed: self.training.shuffle_seed,
            divergence_threshold: self.training.divergence_threshold,
        })
    }

    pub fn csv_dir(&self, root: &Path) -> PathBuf {
        root.join(self.csv_dir.clone().unwrap_or_else(|| PathBuf::from(&self.name)))
    }
}

pub fn run_nn(cfg: &NnConfig) -> Result<Vec<SweepPoint>> {
    let data = cfg.load_dataset()?;
    run_sweep(&cfg.sweep_spec(&data)?, &data)
}

/// Robustness table: one row per (optimizer, rate). Diverged runs leave
/// `final_loss` and `final_accuracy` empty.
pub fn robustness_rows(points: &[SweepPoint]) -> (Vec<String>, Vec<Vec<String>>) {
    let header = [
        "optimizer",
        "r",
        "diverged",
        "diverged_epoch",
        "final_loss",
        "final_accuracy",
        "peak_abs_param",
        "rng",
        "seed",
    ]
    .map(String::from)
    .to_vec();
    let rows = points
        .iter()
        .map(|p| {
            let rep = &p.report;
            // a diverged run has no meaningful final figures
            let last = |v: Option<f64>| v.filter(|_| !rep.diverged).map_or(String::new(), fmt_f64);
            vec![
                p.optimizer.to_string(),
                fmt_f64(p.r),
                rep.diverged.to_string(),
                fmt_opt(rep.diverged_epoch),
                last(rep.final_loss()),
                last(rep.final_accuracy()),
                fmt_f64(rep.peak_abs_param),
                format!("{}/{}", rep.rng_algorithm, rep.rng_seeding),
                rep.seed.to_string(),
            ]
        })
        .collect();
    (header, rows)
}

/// Per-epoch curves of one optimizer across the rate grid.
pub fn curve_rows(points: &[SweepPoint], kind: OptimizerKind) -> (Vec<String>, Vec<Vec<String>>) {
    let header = ["r", "epoch", "loss", "accuracy"].map(String::from).to_vec();
    let mut rows = Vec::new();
    for p in points.iter().filter(|p| p.optimizer == kind) {
        for (e, (l, a)) in p.report.loss_curve.iter().zip(&p.report.accuracy_curve).enumerate() {
            rows.push(vec![fmt_f64(p.r), (e + 1).to_string(), fmt_f64(*l), fmt_f64(*a)]);
        }
    }
    (header, rows)
}

/// Writes `robustness.csv` and one `{optimizer}.csv` of curves per optimizer.
pub fn write_nn(cfg: &NnConfig, points: &[SweepPoint], root: &Path) -> Result<Vec<PathBuf>> {
    let dir = cfg.csv_dir(root);
    let (h, rows) = robustness_rows(points);
    let summary = dir.join(ROBUSTNESS_FILE);
    write_csv(&summary, &h, &rows)?;
    let mut files = vec![summary];
    for kind in cfg.kinds()? {
        let (h, rows) = curve_rows(points, kind);
        let path = dir.join(format!("{kind}.csv"));
        write_csv(&path, &h, &rows)?;
        files.push(path);
    }
    Ok(files)
}
