//! Optimizer benchmark harness built around integral-separated momentum:
//! momentum is dropped per coordinate whenever the current gradient
//! disagrees in sign with the accumulated velocity.
//!
//! The crate provides the update rules ([`optimizers`]), closed-form test
//! objectives ([`objectives`]), a deterministic run loop ([`run`]),
//! oscillation metrics ([`metrics`]), the convergence bound for strongly
//! convex quadratics ([`theory`]) and a small neural-network trainer ([`nn`]).
//!
//! ```
//! use spiopt_core::{run, OptimizerKind, RunConfig, TestFunction};
//!
//! let cfg = RunConfig::new(OptimizerKind::Spi, [-2.0, 1.0])
//!     .with("r", 0.012)
//!     .with("alpha", 0.9)
//!     .steps(100);
//! let traj = run(&TestFunction::F1, &cfg).unwrap();
//! assert!(traj.last().unwrap().residual_norm < 1e-2);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gradcheck;
pub mod metrics;
pub mod nn;
pub mod objectives;
pub mod optimizers;
pub mod run;
pub mod theory;
pub mod vector;

pub use error::{Error, Result};
pub use gradcheck::{gradcheck_suite, GradCheckRow};
pub use metrics::{
    epoch_reduction_ratio, error_reduction_ratio, first_hit, oscillation_report, overshoot, settling_time,
    DimensionReport, OscillationReport, DEFAULT_HIT_TOL, DEFAULT_SETTLE_TOL,
};
pub use objectives::{
    finite_diff_grad, gradient_error, mccormick_minimum, quadratic, EvalResult, Objective, Quadratic, QuadraticSpec,
    TestFunction,
};
pub use optimizers::{Hyperparams, OptimizerKind, OptimizerState, StepDiagnostics};
pub use run::{run, RunConfig, Trajectory, TrajectoryPoint, DEFAULT_DIVERGENCE_THRESHOLD};
pub use theory::{
    admissible_region, check_bound, compare_rate_vs_mom, theorem_constants, theorem_suite, AdmissibleRegion,
    BoundCheck, RateComparison, TheoremParams, TheoremSuiteRow,
};
pub use vector::{sgn, ParamVector};
