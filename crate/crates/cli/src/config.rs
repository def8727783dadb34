//! TOML experiment files.
//!
//! Every file carries `config_version = 1`. A race file names an objective,
//! a start point and a list of optimizers; `[defaults]` supplies
//! hyperparameters to every optimizer that accepts them and entries override
//! per key:
//!
//! ```toml
//! config_version = 1
//! name = "f1_race"
//! objective = "f1"
//! start = [-2.0, 1.0]
//! max_steps = 100
//!
//! [defaults]
//! r = 0.012
//! alpha = 0.99
//!
//! [[optimizers]]
//! label = "SPI"
//! kind = "spi"
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use spiopt_core::{
    Error, Objective, OptimizerKind, ParamVector, Quadratic, QuadraticSpec, Result, RunConfig, TestFunction,
    DEFAULT_DIVERGENCE_THRESHOLD, DEFAULT_HIT_TOL, DEFAULT_SETTLE_TOL,
};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ObjectiveSpec {
    Named(String),
    Quadratic { quadratic: QuadraticSpec },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsConfig {
    #[serde(default = "default_settle")]
    pub settle_tol: f64,
    #[serde(default = "default_hit")]
    pub hit_tol: f64,
}

fn default_settle() -> f64 {
    DEFAULT_SETTLE_TOL
}

fn default_hit() -> f64 {
    DEFAULT_HIT_TOL
}

fn default_threshold() -> f64 {
    DEFAULT_DIVERGENCE_THRESHOLD
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            settle_tol: DEFAULT_SETTLE_TOL,
            hit_tol: DEFAULT_HIT_TOL,
        }
    }
}

/// Output directories, relative to the output root unless absolute.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    pub csv_dir: Option<PathBuf>,
    pub plot_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct OptimizerEntry {
    pub label: String,
    pub kind: String,
    #[serde(flatten)]
    pub hyperparams: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub config_version: u32,
    pub name: String,
    pub objective: ObjectiveSpec,
    pub start: Vec<f64>,
    /// Reference point for metrics; defaults to the objective's declared optimum.
    #[serde(default)]
    pub target: Option<Vec<f64>>,
    pub max_steps: usize,
    #[serde(default = "default_threshold")]
    pub divergence_threshold: f64,
    #[serde(default)]
    pub metrics: MetricsConfig,
    #[serde(default)]
    pub outputs: OutputsConfig,
    #[serde(default)]
    pub defaults: BTreeMap<String, f64>,
    pub optimizers: Vec<OptimizerEntry>,
}

pub(crate) fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub(crate) fn check_version(version: u32) -> Result<()> {
    if version != CONFIG_VERSION {
        return Err(Error::Config(format!(
            "unsupported config_version {version}, expected {CONFIG_VERSION}"
        )));
    }
    Ok(())
}

/// Labels become file names, so they are restricted to a portable set.
pub(crate) fn check_label(label: &str) -> Result<()> {
    let ok = !label.is_empty()
        && label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.' | '+'));
    if !ok {
        return Err(Error::Config(format!(
            "label '{label}' must be non-empty and use only letters, digits, '-', '_', '.', '+'"
        )));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let cfg: ExperimentConfig = read_toml(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_version(self.config_version)?;
        check_label(&self.name)?;
        if self.optimizers.is_empty() {
            return Err(Error::Config("at least one optimizer is required".into()));
        }
        if !(self.metrics.settle_tol > 0.0 && self.metrics.hit_tol > 0.0) {
            return Err(Error::Config("metric tolerances must be positive".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for entry in &self.optimizers {
            check_label(&entry.label)?;
            if !seen.insert(entry.label.as_str()) {
                return Err(Error::Config(format!("duplicate optimizer label '{}'", entry.label)));
            }
        }
        let obj = self.objective()?;
        if let Some(t) = &self.target {
            if t.len() != obj.dim() {
                return Err(Error::DimensionMismatch {
                    expected: obj.dim(),
                    got: t.len(),
                });
            }
        }
        for (_, run) in self.run_configs()? {
            run.build_state()?;
            if run.theta0.dim() != obj.dim() {
                return Err(Error::DimensionMismatch {
                    expected: obj.dim(),
                    got: run.theta0.dim(),
                });
            }
        }
        Ok(())
    }

    pub fn objective(&self) -> Result<Box<dyn Objective>> {
        Ok(match &self.objective {
            ObjectiveSpec::Named(name) => Box::new(name.parse::<TestFunction>()?),
            ObjectiveSpec::Quadratic { quadratic } => Box::new(Quadratic::new(quadratic)?),
        })
    }

    /// Point the metrics are measured against.
    pub fn target(&self, objective: &dyn Objective) -> Result<ParamVector> {
        match &self.target {
            Some(t) => Ok(ParamVector::from(t.clone())),
            None => objective
                .optimum()
                .ok_or_else(|| Error::Config("objective has no declared optimum; set `target`".into())),
        }
    }

    /// One labelled run per optimizer entry, defaults merged in.
    pub fn run_configs(&self) -> Result<Vec<(String, RunConfig)>> {
        self.optimizers
            .iter()
            .map(|entry| {
                let kind: OptimizerKind = entry.kind.parse()?;
                let mut cfg = RunConfig::new(kind, self.start.clone())
                    .steps(self.max_steps)
                    .threshold(self.divergence_threshold);
                for (k, v) in &self.defaults {
                    if kind.accepts(k) {
                        cfg = cfg.with(k, *v);
                    }
                }
                for (k, v) in &entry.hyperparams {
                    cfg = cfg.with(k, *v);
                }
                Ok((entry.label.clone(), cfg))
            })
            .collect()
    }

    pub fn csv_dir(&self, root: &Path) -> PathBuf {
        root.join(
            self.outputs
                .csv_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from(&self.name)),
        )
    }

    pub fn plot_dir(&self, root: &Path) -> PathBuf {
        root.join(
            self.outputs
                .plot_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from(&self.name).join("plots")),
        )
    }
}
