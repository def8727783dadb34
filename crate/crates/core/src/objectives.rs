//! Closed-form test functions and the strongly convex quadratic family.
//!
//! Every objective returns its value and analytic gradient in one call. Known
//! minimizers, strong-convexity and smoothness constants are exposed where
//! they exist so the metrics and bound checks can use them.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::ParamVector;

/// Loss and gradient at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub loss: f64,
    pub gradient: ParamVector,
}

/// Evaluation contract shared by every objective.
pub trait Objective: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn eval(&self, theta: &ParamVector) -> EvalResult;

    fn value(&self, theta: &ParamVector) -> f64 {
        self.eval(theta).loss
    }

    /// Declared minimizer, if known.
    fn optimum(&self) -> Option<ParamVector> {
        None
    }

    /// Strong-convexity constant μ.
    fn strong_convexity(&self) -> Option<f64> {
        None
    }

    /// Gradient Lipschitz constant L.
    fn smoothness(&self) -> Option<f64> {
        None
    }

    /// Per-dimension (low, high) box used for plots and random sampling.
    fn domain(&self) -> Option<Vec<(f64, f64)>> {
        None
    }
}

/// The five fixed 2D test functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestFunction {
    /// θ₁² + 50θ₂²
    F1,
    /// McCormick.
    F2,
    /// Rosenbrock.
    F3,
    /// Goldstein-Price.
    F4,
    /// −(cos θ₁ + 1)(cos 2θ₂ + 1)
    F5,
}

impl TestFunction {
    pub const ALL: [TestFunction; 5] = [
        TestFunction::F1,
        TestFunction::F2,
        TestFunction::F3,
        TestFunction::F4,
        TestFunction::F5,
    ];

    pub fn label(self) -> &'static str {
        match self {
            TestFunction::F1 => "f1",
            TestFunction::F2 => "f2",
            TestFunction::F3 => "f3",
            TestFunction::F4 => "f4",
            TestFunction::F5 => "f5",
        }
    }

    pub fn long_name(self) -> &'static str {
        match self {
            TestFunction::F1 => "quadratic",
            TestFunction::F2 => "McCormick",
            TestFunction::F3 => "Rosenbrock",
            TestFunction::F4 => "Goldstein-Price",
            TestFunction::F5 => "trigonometric",
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f1" | "quadratic" => Ok(TestFunction::F1),
            "f2" | "mccormick" => Ok(TestFunction::F2),
            "f3" | "rosenbrock" => Ok(TestFunction::F3),
            "f4" | "goldstein-price" | "goldstein_price" => Ok(TestFunction::F4),
            "f5" | "trigonometric" | "trig" => Ok(TestFunction::F5),
            other => Err(Error::Config(format!("unknown objective '{other}'"))),
        }
    }
}

/// Minimizer of the McCormick function on branch `k`.
///
/// Setting the gradient to zero gives θ₁ − θ₂ = 1 and cos(θ₁ + θ₂) = −½; the
/// Hessian is positive definite when sin(θ₁ + θ₂) < 0, so the minimizers sit
/// at θ₁ + θ₂ = −2π/3 + 2πk. `k = 0` is the global minimum.
pub fn mccormick_minimum(k: i32) -> ParamVector {
    let s = -2.0 * PI / 3.0 + 2.0 * PI * f64::from(k);
    ParamVector::from([s / 2.0 + 0.5, s / 2.0 - 0.5])
}

fn f2_parts(x: f64, y: f64) -> (f64, [f64; 2]) {
    let c = (x + y).cos();
    let loss = (x + y).sin() + (x - y).powi(2) - 1.5 * x + 2.5 * y + 1.0;
    (loss, [c + 2.0 * (x - y) - 1.5, c - 2.0 * (x - y) + 2.5])
}

fn f4_parts(x: f64, y: f64) -> (f64, [f64; 2]) {
    let s = x + y + 1.0;
    let p = 19.0 - 14.0 * x + 3.0 * x * x - 14.0 * y + 6.0 * x * y + 3.0 * y * y;
    let first = 1.0 + s * s * p;
    // dP/dx == dP/dy
    let dp = -14.0 + 6.0 * x + 6.0 * y;
    let d_first = 2.0 * s * p + s * s * dp;

    let t = 2.0 * x - 3.0 * y;
    let q = 18.0 - 32.0 * x + 12.0 * x * x + 48.0 * y - 36.0 * x * y + 27.0 * y * y;
    let second = 30.0 + t * t * q;
    let dqx = -32.0 + 24.0 * x - 36.0 * y;
    let dqy = 48.0 - 36.0 * x + 54.0 * y;
    let d_second_x = 4.0 * t * q + t * t * dqx;
    let d_second_y = -6.0 * t * q + t * t * dqy;

    (
        first * second,
        [
            d_first * second + first * d_second_x,
            d_first * second + first * d_second_y,
        ],
    )
}

impl Objective for TestFunction {
    fn name(&self) -> &str {
        self.label()
    }

    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, theta: &ParamVector) -> EvalResult {
        assert_eq!(theta.dim(), 2, "{} is two-dimensional", self.label());
        let (x, y) = (theta[0], theta[1]);
        let (loss, g) = match self {
            TestFunction::F1 => (x * x + 50.0 * y * y, [2.0 * x, 100.0 * y]),
            TestFunction::F2 => f2_parts(x, y),
            TestFunction::F3 => {
                let r = y - x * x;
                (
                    (1.0 - x).powi(2) + 100.0 * r * r,
                    [-2.0 * (1.0 - x) - 400.0 * x * r, 200.0 * r],
                )
            }
            TestFunction::F4 => f4_parts(x, y),
            TestFunction::F5 => {
                let a = x.cos() + 1.0;
                let b = (2.0 * y).cos() + 1.0;
                (-a * b, [x.sin() * b, 2.0 * (2.0 * y).sin() * a])
            }
        };
        EvalResult {
            loss,
            gradient: ParamVector::from(g),
        }
    }

    fn optimum(&self) -> Option<ParamVector> {
        Some(match self {
            TestFunction::F1 => ParamVector::from([0.0, 0.0]),
            TestFunction::F2 => mccormick_minimum(0),
            TestFunction::F3 => ParamVector::from([1.0, 1.0]),
            TestFunction::F4 => ParamVector::from([0.0, -1.0]),
            TestFunction::F5 => ParamVector::from([0.0, 0.0]),
        })
    }

    fn strong_convexity(&self) -> Option<f64> {
        match self {
            TestFunction::F1 => Some(2.0),
            _ => None,
        }
    }

    fn smoothness(&self) -> Option<f64> {
        match self {
            TestFunction::F1 => Some(100.0),
            _ => None,
        }
    }

    fn domain(&self) -> Option<Vec<(f64, f64)>> {
        Some(match self {
            TestFunction::F1 => vec![(-3.0, 3.0), (-3.0, 3.0)],
            TestFunction::F2 => vec![(-3.0, 7.0), (-4.0, 7.0)],
            TestFunction::F3 => vec![(-2.0, 5.0), (-3.0, 5.0)],
            TestFunction::F4 => vec![(-5.0, 5.0), (-5.0, 5.0)],
            TestFunction::F5 => vec![(-3.0, 3.0), (-3.0, 3.0)],
        })
    }
}

/// Diagonal quadratic `f(θ) = Σ aᵢ (θᵢ − cᵢ)²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticSpec {
    pub diag: Vec<f64>,
    pub center: Vec<f64>,
}

/// A validated [`QuadraticSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    diag: Vec<f64>,
    center: ParamVector,
    name: String,
}

impl Quadratic {
    pub fn new(spec: &QuadraticSpec) -> Result<Self> {
        if spec.diag.is_empty() {
            return Err(Error::Config("quadratic needs at least one dimension".into()));
        }
        if spec.diag.len() != spec.center.len() {
            return Err(Error::DimensionMismatch {
                expected: spec.diag.len(),
                got: spec.center.len(),
            });
        }
        if let Some(a) = spec.diag.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::Config(format!(
                "quadratic coefficients must be positive, got {a}"
            )));
        }
        if !spec.center.iter().all(|c| c.is_finite()) {
            return Err(Error::Config("quadratic center must be finite".into()));
        }
        Ok(Quadratic {
            diag: spec.diag.clone(),
            center: ParamVector::from(spec.center.clone()),
            name: "quadratic".to_string(),
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn center(&self) -> &ParamVector {
        &self.center
    }

    pub fn mu(&self) -> f64 {
        2.0 * self.diag.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn lipschitz(&self) -> f64 {
        2.0 * self.diag.iter().cloned().fold(0.0, f64::max)
    }
}

/// Builds the quadratic objective described by `spec`.
pub fn quadratic(spec: &QuadraticSpec) -> Result<Quadratic> {
    Quadratic::new(spec)
}

impl Objective for Quadratic {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn eval(&self, theta: &ParamVector) -> EvalResult {
        assert_eq!(theta.dim(), self.dim());
        let mut loss = 0.0;
        let mut grad = Vec::with_capacity(self.dim());
        for ((a, t), c) in self.diag.iter().zip(theta).zip(&self.center) {
            let d = t - c;
            loss += a * d * d;
            grad.push((2.0 * a) * d);
        }
        EvalResult {
            loss,
            gradient: ParamVector::from(grad),
        }
    }

    fn optimum(&self) -> Option<ParamVector> {
        Some(self.center.clone())
    }

    fn strong_convexity(&self) -> Option<f64> {
        Some(self.mu())
    }

    fn smoothness(&self) -> Option<f64> {
        Some(self.lipschitz())
    }

    fn domain(&self) -> Option<Vec<(f64, f64)>> {
        Some(self.center.iter().map(|c| (c - 3.0, c + 3.0)).collect())
    }
}

/// Central-difference gradient `(f(θ + h eᵢ) − f(θ − h eᵢ)) / 2h`.
pub fn finite_diff_grad<O: Objective + ?Sized>(objective: &O, theta: &ParamVector, h: f64) -> Result<ParamVector> {
    if !(h > 0.0) {
        return Err(Error::Config(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let mut probe = theta.clone();
    let grad = (0..theta.dim())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let up = objective.value(&probe);
            probe[i] = orig - h;
            let down = objective.value(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect::<Vec<_>>();
    Ok(ParamVector::from(grad))
}

/// Gradient error used by the finite-difference checks: relative error when
/// the analytic gradient norm is at least one, absolute error otherwise.
pub fn gradient_error(analytic: &ParamVector, numeric: &ParamVector) -> f64 {
    let diff = analytic.distance(numeric);
    let scale = analytic.norm();
    if scale >= 1.0 {
        diff / scale
    } else {
        diff
    }
}
