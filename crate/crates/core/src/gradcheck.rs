//! Finite-difference gradient audits for the test functions and the MLP.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::nn::{forward_backward_at, Dataset, MlpShape};
use crate::objectives::{finite_diff_grad, gradient_error, Objective, TestFunction};
use crate::vector::ParamVector;

pub const FUNCTION_FD_STEP: f64 = 1e-6;
pub const FUNCTION_REL_TOL: f64 = 1e-6;
pub const FUNCTION_ABS_TOL: f64 = 1e-8;
pub const MLP_FD_STEP: f64 = 1e-5;
pub const MLP_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheckRow {
    pub target: String,
    pub cases: usize,
    /// Largest relative error among cases with ‖g‖ ≥ 1.
    pub max_rel_error: f64,
    /// Largest absolute error among cases with ‖g‖ < 1.
    pub max_abs_error: f64,
    pub passed: bool,
}

fn uniform_point<R: Rng>(rng: &mut R, domain: &[(f64, f64)]) -> ParamVector {
    domain
        .iter()
        .map(|(lo, hi)| rng.random_range(*lo..=*hi))
        .collect::<Vec<_>>()
        .into()
}

/// Checks one objective at `points` uniform samples of its domain.
pub fn check_function<O: Objective + ?Sized>(objective: &O, points: usize, seed: u64) -> GradCheckRow {
    let domain = objective.domain().unwrap_or_else(|| vec![(-3.0, 3.0); objective.dim()]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_rel: f64 = 0.0;
    let mut max_abs: f64 = 0.0;
    for _ in 0..points {
        let theta = uniform_point(&mut rng, &domain);
        let analytic = objective.eval(&theta).gradient;
        let numeric = finite_diff_grad(objective, &theta, FUNCTION_FD_STEP).expect("positive step");
        let err = gradient_error(&analytic, &numeric);
        if analytic.norm() >= 1.0 {
            max_rel = max_rel.max(err);
        } else {
            max_abs = max_abs.max(err);
        }
    }
    GradCheckRow {
        target: objective.name().to_string(),
        cases: points,
        max_rel_error: max_rel,
        max_abs_error: max_abs,
        passed: max_rel < FUNCTION_REL_TOL && max_abs < FUNCTION_ABS_TOL,
    }
}

/// Random model shape, parameters and 4-example batch.
pub fn random_mlp_case<R: Rng>(rng: &mut R) -> (MlpShape, ParamVector, Dataset) {
    let d = rng.random_range(1..=5);
    let h = rng.random_range(0..=6);
    let c = rng.random_range(2..=4);
    let shape = MlpShape::new(d, h, c).expect("valid shape");
    let params: Vec<f64> = (0..shape.param_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let inputs: Vec<f64> = (0..4 * d).map(|_| rng.random_range(-2.0..2.0)).collect();
    let labels: Vec<usize> = (0..4).map(|_| rng.random_range(0..c)).collect();
    let data = Dataset::new(inputs, d, labels, c, "random").expect("valid dataset");
    (shape, params.into(), data)
}

/// Central-difference gradient of the mean cross-entropy.
pub fn mlp_finite_diff(shape: MlpShape, params: &ParamVector, data: &Dataset, batch: &[usize], h: f64) -> ParamVector {
    let mut probe = params.clone();
    let grad = (0..params.dim())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let up = forward_backward_at(shape, &probe, data, batch).0;
            probe[i] = orig - h;
            let down = forward_backward_at(shape, &probe, data, batch).0;
            probe[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect::<Vec<_>>();
    grad.into()
}

/// Checks backpropagation on `cases` random (model, batch) pairs.
pub fn check_mlp(cases: usize, seed: u64) -> GradCheckRow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_rel: f64 = 0.0;
    let mut max_abs: f64 = 0.0;
    for _ in 0..cases {
        let (shape, params, data) = random_mlp_case(&mut rng);
        let batch = [0, 1, 2, 3];
        let analytic = forward_backward_at(shape, &params, &data, &batch).1;
        let numeric = mlp_finite_diff(shape, &params, &data, &batch, MLP_FD_STEP);
        let err = gradient_error(&analytic, &numeric);
        if analytic.norm() >= 1.0 {
            max_rel = max_rel.max(err);
        } else {
            max_abs = max_abs.max(err);
        }
    }
    GradCheckRow {
        target: "mlp".into(),
        cases,
        max_rel_error: max_rel,
        max_abs_error: max_abs,
        passed: max_rel < MLP_TOL && max_abs < MLP_TOL,
    }
}

/// f1–f5 at 100 points each, then the MLP at 20 cases.
pub fn gradcheck_suite(seed: u64) -> Vec<GradCheckRow> {
    let mut rows: Vec<GradCheckRow> = TestFunction::ALL
        .iter()
        .enumerate()
        .map(|(i, f)| check_function(f, 100, seed.wrapping_add(i as u64)))
        .collect();
    rows.push(check_mlp(20, seed.wrapping_add(100)));
    rows
}
