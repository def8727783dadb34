//! First-order update rules.
//!
//! All momentum-style rules keep the velocity as the descent step itself:
//! `v' = α·v + r·g` and `θ' = θ − v'`. The sign-gated rules (SPI, CI-β) drop
//! the `α·v` term per coordinate when their condition says so.
//!
//! Every step takes the gradient evaluated at [`OptimizerState::eval_point`],
//! which is `θ` for everything except Nesterov, where it is the lookahead
//! point `θ − α·v`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::{sgn, ParamVector};

/// Momentum coefficient used by the bundled experiments.
pub const DEFAULT_ALPHA: f64 = 0.99;
pub const DEFAULT_BETA1: f64 = 0.9;
pub const DEFAULT_BETA2: f64 = 0.999;
pub const DEFAULT_RMSPROP_DECAY: f64 = 0.9;
pub const DEFAULT_EPSILON: f64 = 1e-8;
pub const DEFAULT_ADDSIGN_ALPHA: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Mom,
    Nag,
    Ci,
    Spi,
    Pid,
    Adam,
    RmsProp,
    AddSign,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 9] = [
        OptimizerKind::Sgd,
        OptimizerKind::Mom,
        OptimizerKind::Nag,
        OptimizerKind::Ci,
        OptimizerKind::Spi,
        OptimizerKind::Pid,
        OptimizerKind::Adam,
        OptimizerKind::RmsProp,
        OptimizerKind::AddSign,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Mom => "mom",
            OptimizerKind::Nag => "nag",
            OptimizerKind::Ci => "ci",
            OptimizerKind::Spi => "spi",
            OptimizerKind::Pid => "pid",
            OptimizerKind::Adam => "adam",
            OptimizerKind::RmsProp => "rmsprop",
            OptimizerKind::AddSign => "addsign",
        }
    }

    /// Hyperparameter keys this rule accepts.
    pub fn accepted_keys(self) -> &'static [&'static str] {
        match self {
            OptimizerKind::Sgd => &["r"],
            OptimizerKind::Mom | OptimizerKind::Nag | OptimizerKind::Spi => &["r", "alpha"],
            OptimizerKind::Ci => &["r", "alpha", "beta"],
            OptimizerKind::Pid => &["r", "alpha", "kd"],
            OptimizerKind::Adam => &["r", "beta1", "beta2", "epsilon"],
            OptimizerKind::RmsProp => &["r", "beta2", "epsilon"],
            OptimizerKind::AddSign => &["r", "alpha"],
        }
    }

    /// Keys without a default.
    pub fn required_keys(self) -> &'static [&'static str] {
        match self {
            OptimizerKind::Sgd | OptimizerKind::Adam | OptimizerKind::RmsProp | OptimizerKind::AddSign => &["r"],
            OptimizerKind::Mom | OptimizerKind::Nag | OptimizerKind::Spi => &["r", "alpha"],
            OptimizerKind::Ci => &["r", "alpha", "beta"],
            OptimizerKind::Pid => &["r", "alpha", "kd"],
        }
    }

    pub fn accepts(self, key: &str) -> bool {
        self.accepted_keys().contains(&key)
    }

    /// Whether the gate mask can contain zeros.
    pub fn is_gating(self) -> bool {
        matches!(self, OptimizerKind::Spi | OptimizerKind::Ci)
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "sgd" | "gd" => OptimizerKind::Sgd,
            "mom" | "momentum" => OptimizerKind::Mom,
            "nag" | "nesterov" => OptimizerKind::Nag,
            "ci" => OptimizerKind::Ci,
            "spi" => OptimizerKind::Spi,
            "pid" => OptimizerKind::Pid,
            "adam" => OptimizerKind::Adam,
            "rmsprop" => OptimizerKind::RmsProp,
            "addsign" => OptimizerKind::AddSign,
            other => return Err(Error::UnknownOptimizer(other.to_string())),
        })
    }
}

/// Validated hyperparameters. Fields a rule does not use keep their defaults
/// and are never read.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    /// Learning rate.
    pub r: f64,
    /// Momentum coefficient (AddSign: moment decay).
    pub alpha: f64,
    /// CI threshold; `f64::INFINITY` keeps momentum everywhere.
    pub beta: f64,
    /// Derivative gain.
    pub kd: f64,
    pub beta1: f64,
    /// Adam second-moment decay, RMSprop decay ρ.
    pub beta2: f64,
    pub epsilon: f64,
}

impl Hyperparams {
    /// Builds and validates the hyperparameters for `kind` from a key→value map.
    pub fn from_map(kind: OptimizerKind, map: &BTreeMap<String, f64>) -> Result<Self> {
        for key in map.keys() {
            if !kind.accepts(key) {
                return Err(Error::UnknownHyperparameter {
                    optimizer: kind.as_str(),
                    key: key.clone(),
                });
            }
        }
        for key in kind.required_keys() {
            if !map.contains_key(*key) {
                return Err(Error::MissingHyperparameter {
                    optimizer: kind.as_str(),
                    key,
                });
            }
        }
        let get = |k: &str, default: f64| map.get(k).copied().unwrap_or(default);
        let hp = Hyperparams {
            r: get("r", f64::NAN),
            alpha: get(
                "alpha",
                if kind == OptimizerKind::AddSign {
                    DEFAULT_ADDSIGN_ALPHA
                } else {
                    0.0
                },
            ),
            beta: get("beta", f64::INFINITY),
            kd: get("kd", 0.0),
            beta1: get("beta1", DEFAULT_BETA1),
            beta2: get(
                "beta2",
                if kind == OptimizerKind::RmsProp {
                    DEFAULT_RMSPROP_DECAY
                } else {
                    DEFAULT_BETA2
                },
            ),
            epsilon: get("epsilon", DEFAULT_EPSILON),
        };
        hp.validate(kind)?;
        Ok(hp)
    }

    fn validate(&self, kind: OptimizerKind) -> Result<()> {
        let bad = |what: String| Err(Error::Config(format!("{kind}: {what}")));
        if !(self.r.is_finite() && self.r > 0.0) {
            return bad(format!("learning rate r must be positive and finite, got {}", self.r));
        }
        if kind.accepts("alpha") && !(0.0..1.0).contains(&self.alpha) {
            return bad(format!("alpha must lie in [0, 1), got {}", self.alpha));
        }
        if kind == OptimizerKind::Ci && !(self.beta >= 0.0) {
            return bad(format!("beta must be >= 0, got {}", self.beta));
        }
        if kind == OptimizerKind::Pid && !self.kd.is_finite() {
            return bad(format!("kd must be finite, got {}", self.kd));
        }
        for (name, val, used) in [
            ("beta1", self.beta1, kind == OptimizerKind::Adam),
            ("beta2", self.beta2, kind.accepts("beta2")),
        ] {
            if used && !(val > 0.0 && val < 1.0) {
                return bad(format!("{name} must lie in (0, 1), got {val}"));
            }
        }
        if kind.accepts("epsilon") && !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        Ok(())
    }
}

/// Per-step diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    /// `true` where the momentum term was kept. All-true for non-gating rules.
    pub gate_mask: Vec<bool>,
    /// L2 norm of [`Self::state_delay_per_dim`].
    pub state_delay: f64,
    /// Per-coordinate `|θ_{t+1} − θ̃_t|`.
    pub state_delay_per_dim: ParamVector,
    /// `θ_t − θ_{t+1}`.
    pub raw_update: ParamVector,
}

impl StepDiagnostics {
    fn new(gate_mask: Vec<bool>, delay: ParamVector, raw_update: ParamVector) -> Self {
        StepDiagnostics {
            gate_mask,
            state_delay: delay.norm(),
            state_delay_per_dim: delay,
            raw_update,
        }
    }

    pub fn any_gated(&self) -> bool {
        self.gate_mask.iter().any(|g| !g)
    }
}

fn abs_vec(v: &ParamVector) -> ParamVector {
    ParamVector::from(v.iter().map(|x| x.abs()).collect::<Vec<_>>())
}

/// Mutable state of one optimizer instance.
///
/// Buffers a rule does not use stay at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    kind: OptimizerKind,
    hyper: Hyperparams,
    v: ParamVector,
    d: ParamVector,
    prev_grad: ParamVector,
    m1: ParamVector,
    m2: ParamVector,
    t: u64,
}

impl OptimizerState {
    pub fn new(kind: OptimizerKind, hyper: Hyperparams, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("parameter dimension must be at least 1".into()));
        }
        hyper.validate(kind)?;
        Ok(OptimizerState {
            kind,
            hyper,
            v: ParamVector::zeros(dim),
            d: ParamVector::zeros(dim),
            prev_grad: ParamVector::zeros(dim),
            m1: ParamVector::zeros(dim),
            m2: ParamVector::zeros(dim),
            t: 0,
        })
    }

    pub fn from_map(kind: OptimizerKind, map: &BTreeMap<String, f64>, dim: usize) -> Result<Self> {
        Self::new(kind, Hyperparams::from_map(kind, map)?, dim)
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn hyper(&self) -> &Hyperparams {
        &self.hyper
    }

    pub fn dim(&self) -> usize {
        self.v.dim()
    }

    pub fn velocity(&self) -> &ParamVector {
        &self.v
    }

    pub fn derivative(&self) -> &ParamVector {
        &self.d
    }

    pub fn prev_grad(&self) -> &ParamVector {
        &self.prev_grad
    }

    pub fn first_moment(&self) -> &ParamVector {
        &self.m1
    }

    pub fn second_moment(&self) -> &ParamVector {
        &self.m2
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }

    /// Overwrites the velocity; used to resume from a known state.
    pub fn set_velocity(&mut self, v: ParamVector) {
        assert_eq!(v.dim(), self.dim());
        self.v = v;
    }

    /// Overwrites the moment accumulators and step counter.
    pub fn set_moments(&mut self, m1: ParamVector, m2: ParamVector, t: u64) {
        assert_eq!(m1.dim(), self.dim());
        assert_eq!(m2.dim(), self.dim());
        self.m1 = m1;
        self.m2 = m2;
        self.t = t;
    }

    /// Zeroes every buffer and the step counter; hyperparameters are kept.
    pub fn reset(&mut self) {
        self.v.fill(0.0);
        self.d.fill(0.0);
        self.prev_grad.fill(0.0);
        self.m1.fill(0.0);
        self.m2.fill(0.0);
        self.t = 0;
    }

    /// Point whose gradient the next step consumes.
    pub fn eval_point(&self, theta: &ParamVector) -> ParamVector {
        match self.kind {
            OptimizerKind::Nag => theta.sub_scaled(self.hyper.alpha, &self.v),
            _ => theta.clone(),
        }
    }

    /// Applies one update. `grad` must be the gradient at
    /// [`eval_point`](Self::eval_point)`(theta)`.
    pub fn step(&mut self, theta: &ParamVector, grad: &ParamVector) -> (ParamVector, StepDiagnostics) {
        assert_eq!(theta.dim(), self.dim(), "theta dimension");
        assert_eq!(grad.dim(), self.dim(), "gradient dimension");
        match self.kind {
            OptimizerKind::Sgd => self.sgd_step(theta, grad),
            OptimizerKind::Mom => self.mom_step(theta, grad),
            OptimizerKind::Nag => self.nag_update(theta, grad),
            OptimizerKind::Ci => self.ci_step(theta, grad),
            OptimizerKind::Spi => self.spi_step(theta, grad),
            OptimizerKind::Pid => self.pid_step(theta, grad),
            OptimizerKind::Adam => self.adam_step(theta, grad),
            OptimizerKind::RmsProp => self.rmsprop_step(theta, grad),
            OptimizerKind::AddSign => self.addsign_step(theta, grad),
        }
    }

    fn all_open(&self) -> Vec<bool> {
        vec![true; self.dim()]
    }

    /// `θ' = θ − r·g`.
    pub fn sgd_step(&mut self, theta: &ParamVector, grad: &ParamVector) -> (ParamVector, StepDiagnostics) {
        let step = grad.scale(self.hyper.r);
        let next = theta.sub(&step);
        self.t += 1;
        let diag = StepDiagnostics::new(self.all_open(), abs_vec(&step), step);
        (next, diag)
    }

    /// `v' = α·v + r·g`, `θ' = θ − v'`.
    pub fn mom_step(&mut self, theta: &ParamVector, grad: &ParamVector) -> (ParamVector, StepDiagnostics) {
        let open = self.all_open();
        self.gated_momentum(theta, grad, &open)
    }

    /// Nesterov step; `grad_at` is called once, at `θ − α·v`.
    pub fn nag_step<F>(&mut self, theta: &ParamVector, grad_at: F) -> (ParamVector, StepDiagnostics)
    where
        F: FnOnce(&ParamVector) -> ParamVector,
    {
        let lookahead = theta.sub_scaled(self.hyper.alpha, &self.v);
        let g = grad_at(&lookahead);
        self.nag_update(theta, &g)
    }

    fn nag_update(&mut self, theta: &ParamVector, lookahead_grad: &ParamVector) -> (ParamVector, StepDiagnostics) {
        let (alpha, r) = (self.hyper.alpha, self.hyper.r);
        let step: Vec<f64> = self
            .v
            .iter()
            .zip(lookahead_grad)
            .map(|(v, g)| alpha * v + r * g)
            .collect();
        let step = ParamVector::from(step);
        let next = theta.sub(&step);
        let delay = abs_vec(&lookahead_grad.scale(r));
        self.v = step.clone();
        self.t += 1;
        (next, StepDiagnostics::new(self.all_open(), delay, step))
    }

    /// Conditional integration: momentum kept in coordinate `i` only while
    /// `|gᵢ| < β`.
    pub fn ci_step(&mut self, theta: &ParamVector, grad: &ParamVector) -> (ParamVector, StepDiagnostics) {
        let beta = self.hyper.beta;
        let keep: Vec<bool> = grad.iter().map(|g| g.abs() < beta).collect();
        self.gated_momentum(theta, grad, &keep)
    }

    /// Integral separation: momentum dropped in coordinate `i` exactly when
    /// `sgn(gᵢ)·sgn(vᵢ) = −1`.
    ///
    /// With `vᵢ = 0` the product is 0, so the gate stays open; gating before
    /// or after the decay makes no difference there because `α·0 = 0`.
    pub fn spi_step(&mut self, theta: &ParamVector, grad: &ParamVector) -> (ParamVector, StepDiagnostics) {
        let keep: Vec<bool> = grad
            .iter()
            .zip(&self.v)
            .map(|(g, v)| sgn(*g) * sgn(*v) != -1.0)
            .collect();
        let (next, mut diag) = self.gated_momentum(theta, grad, &keep);
        if diag.any_gated() {
            // reduced to the plain gradient-step delay while oscillation is detected
            let delay = abs_vec(&grad.scale(self.hyper.r));
            diag.state_delay = delay.norm();
            diag.state_delay_per_dim = delay;
        }
        (next, diag)
    }

    fn gated_momentum(
        &mut self,
        theta: &ParamVector,
        grad: &ParamVector,
        keep: &[bool],
    ) -> (ParamVector, StepDiagnostics) {
        let (alpha, r) = (self.hyper.alpha, self.hyper.r);
        let step: Vec<f64> = self
            .v
            .iter()
            .zip(grad)
            .zip(keep)
            .map(|((v, g), &k)| if k { alpha * v + r * g } else { r * g })
            .collect();
        let step = ParamVector::from(step);
        let next = theta.sub(&step);
        self.v = step.clone();
        self.t += 1;
        (next, StepDiagnostics::new(keep.to_vec(), abs_vec(&step), step))
    }

    /// Momentum plus a smoothed gradient-difference term:
    /// `d' = α·d + (1−α)(g − g_prev)`, `θ' = θ − v' − kd·d'`.
    pub fn pid_step(&mut self, theta: &ParamVector, grad: &ParamVector) -> (ParamVector, StepDiagnostics) {
        let (alpha, r, kd) = (self.hyper.alpha, self.hyper.r, self.hyper.kd);
        if self.t == 0 {
            self.prev_grad = grad.clone();
        }
        let mut v = Vec::with_capacity(self.dim());
        let mut d = Vec::with_capacity(self.dim());
        let mut step = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let vi = alpha * self.v[i] + r * grad[i];
            let di = alpha * self.d[i] + (1.0 - alpha) * (grad[i] - self.prev_grad[i]);
            v.push(vi);
            d.push(di);
            step.push(vi + kd * di);
        }
        let step = ParamVector::from(step);
        let next = theta.sub(&step);
        self.v = ParamVector::from(v);
        self.d = ParamVector::from(d);
        self.prev_grad = grad.clone();
        self.t += 1;
        (next, StepDiagnostics::new(self.all_open(), abs_vec(&step), step))
    }

    /// Bias-corrected Adam.
    pub fn adam_step(&mut self, theta: &ParamVector, grad: &ParamVector) -> (ParamVector, StepDiagnostics) {
        let Hyperparams {
            r,
            beta1,
            beta2,
            epsilon,
            ..
        } = self.hyper;
        self.t += 1;
        let c1 = 1.0 - beta1.powf(self.t as f64);
        let c2 = 1.0 - beta2.powf(self.t as f64);
        let mut step = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let g = grad[i];
            self.m1[i] = beta1 * self.m1[i] + (1.0 - beta1) * g;
            self.m2[i] = beta2 * self.m2[i] + (1.0 - beta2) * g * g;
            let m_hat = self.m1[i] / c1;
            let u_hat = self.m2[i] / c2;
            step.push(r * m_hat / (u_hat.sqrt() + epsilon));
        }
        let step = ParamVector::from(step);
        let next = theta.sub(&step);
        (next, StepDiagnostics::new(self.all_open(), abs_vec(&step), step))
    }

    /// RMSprop with decay ρ stored in `beta2`.
    pub fn rmsprop_step(&mut self, theta: &ParamVector, grad: &ParamVector) -> (ParamVector, StepDiagnostics) {
        let (r, rho, eps) = (self.hyper.r, self.hyper.beta2, self.hyper.epsilon);
        let mut step = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let g = grad[i];
            self.m2[i] = rho * self.m2[i] + (1.0 - rho) * g * g;
            step.push(r * g / (self.m2[i].sqrt() + eps));
        }
        self.t += 1;
        let step = ParamVector::from(step);
        let next = theta.sub(&step);
        (next, StepDiagnostics::new(self.all_open(), abs_vec(&step), step))
    }

    /// AddSign: the step is doubled where the gradient agrees in sign with
    /// its running mean and cancelled where it disagrees.
    pub fn addsign_step(&mut self, theta: &ParamVector, grad: &ParamVector) -> (ParamVector, StepDiagnostics) {
        let (r, alpha) = (self.hyper.r, self.hyper.alpha);
        let mut step = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let g = grad[i];
            self.m1[i] = alpha * self.m1[i] + (1.0 - alpha) * g;
            step.push(r * (1.0 + sgn(g) * sgn(self.m1[i])) * g);
        }
        self.t += 1;
        let step = ParamVector::from(step);
        let next = theta.sub(&step);
        (next, StepDiagnostics::new(self.all_open(), abs_vec(&step), step))
    }
}
