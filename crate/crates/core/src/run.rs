//! Deterministic optimization loop producing [`Trajectory`] records.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::optimizers::{OptimizerKind, OptimizerState};
use crate::vector::ParamVector;

pub const DEFAULT_DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Everything needed to reproduce one optimizer run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub optimizer: OptimizerKind,
    pub hyperparams: BTreeMap<String, f64>,
    pub theta0: ParamVector,
    pub max_steps: usize,
    pub divergence_threshold: f64,
    /// Reserved for stochastic objectives; full-batch runs ignore it.
    pub seed: u64,
}

impl RunConfig {
    pub fn new(optimizer: OptimizerKind, theta0: impl Into<ParamVector>) -> Self {
        RunConfig {
            optimizer,
            hyperparams: BTreeMap::new(),
            theta0: theta0.into(),
            max_steps: 100,
            divergence_threshold: DEFAULT_DIVERGENCE_THRESHOLD,
            seed: 0,
        }
    }

    /// Sets one hyperparameter.
    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.hyperparams.insert(key.to_string(), value);
        self
    }

    pub fn steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn threshold(mut self, divergence_threshold: f64) -> Self {
        self.divergence_threshold = divergence_threshold;
        self
    }

    /// Checks the scalar fields and builds a fresh optimizer state.
    pub fn build_state(&self) -> Result<OptimizerState> {
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be at least 1".into()));
        }
        if !(self.divergence_threshold > 0.0) {
            return Err(Error::Config(format!(
                "divergence_threshold must be positive, got {}",
                self.divergence_threshold
            )));
        }
        OptimizerState::from_map(self.optimizer, &self.hyperparams, self.theta0.dim())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub step: usize,
    pub theta: ParamVector,
    /// Objective value f(θ_t).
    pub loss: f64,
    /// ‖θ_t − θ*‖₂, NaN when no optimum is declared.
    pub residual_norm: f64,
    /// State delay of the step that produced θ_t (0 at step 0).
    pub state_delay: f64,
    pub gate_mask: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    pub diverged: bool,
    pub diverged_at: Option<usize>,
}

impl Trajectory {
    /// Trajectory made of bare iterates, for metric computations on
    /// hand-built sequences. Losses and residuals are NaN.
    pub fn from_thetas<I>(thetas: I) -> Self
    where
        I: IntoIterator<Item = ParamVector>,
    {
        let points = thetas
            .into_iter()
            .enumerate()
            .map(|(step, theta)| TrajectoryPoint {
                step,
                gate_mask: vec![true; theta.dim()],
                theta,
                loss: f64::NAN,
                residual_norm: f64::NAN,
                state_delay: 0.0,
            })
            .collect();
        Trajectory {
            points,
            diverged: false,
            diverged_at: None,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, |p| p.theta.dim())
    }

    pub fn last(&self) -> Option<&TrajectoryPoint> {
        self.points.last()
    }

    pub fn thetas(&self) -> impl Iterator<Item = &ParamVector> {
        self.points.iter().map(|p| &p.theta)
    }

    /// Per-step `|f(θ_t) − f*|`.
    pub fn loss_gap(&self, f_star: f64) -> Vec<f64> {
        self.points.iter().map(|p| (p.loss - f_star).abs()).collect()
    }
}

fn is_runaway(theta: &ParamVector, loss: f64, threshold: f64) -> bool {
    !loss.is_finite() || theta.iter().any(|x| !x.is_finite() || x.abs() > threshold)
}

/// Runs the configured optimizer on `objective`.
///
/// Point 0 holds θ₀ before any update. The run stops after `max_steps`
/// updates, or at the first iterate whose loss is non-finite or whose
/// coordinates leave `[−threshold, threshold]`; that iterate is recorded and
/// flagged as `diverged_at`.
pub fn run<O: Objective + ?Sized>(objective: &O, config: &RunConfig) -> Result<Trajectory> {
    if objective.dim() != config.theta0.dim() {
        return Err(Error::DimensionMismatch {
            expected: objective.dim(),
            got: config.theta0.dim(),
        });
    }
    let mut state = config.build_state()?;
    let optimum = objective.optimum();
    let residual = |theta: &ParamVector| optimum.as_ref().map_or(f64::NAN, |o| theta.distance(o));
    let dim = config.theta0.dim();

    let mut theta = config.theta0.clone();
    let mut current = objective.eval(&theta);
    let mut traj = Trajectory {
        points: Vec::with_capacity(config.max_steps + 1),
        diverged: false,
        diverged_at: None,
    };
    traj.points.push(TrajectoryPoint {
        step: 0,
        theta: theta.clone(),
        loss: current.loss,
        residual_norm: residual(&theta),
        state_delay: 0.0,
        gate_mask: vec![true; dim],
    });
    if is_runaway(&theta, current.loss, config.divergence_threshold) {
        traj.diverged = true;
        traj.diverged_at = Some(0);
        return Ok(traj);
    }

    for step in 1..=config.max_steps {
        let grad = if state.kind() == OptimizerKind::Nag {
            objective.eval(&state.eval_point(&theta)).gradient
        } else {
            current.gradient
        };
        let (next, diag) = state.step(&theta, &grad);
        theta = next;
        current = objective.eval(&theta);
        traj.points.push(TrajectoryPoint {
            step,
            theta: theta.clone(),
            loss: current.loss,
            residual_norm: residual(&theta),
            state_delay: diag.state_delay,
            gate_mask: diag.gate_mask,
        });
        if is_runaway(&theta, current.loss, config.divergence_threshold) {
            traj.diverged = true;
            traj.diverged_at = Some(step);
            break;
        }
    }
    Ok(traj)
}
