//! Convergence guarantee for the integral-separated optimizer on μ-strongly
//! convex, L-smooth objectives.
//!
//! For `0 < r < 2μ/L²` and `0 < α < (−p + √(p² + 16q)) / 8` with
//!
//! ```text
//! p = 4 + 4r + rL²            q = 2rμ − r²L²
//! m = 1 + 3α + 2rα + 2α² + rαL² + r²L² − 2rμ
//! n = α + 2rα + 2α²           z = (m + √(m² + 4n)) / 2
//! ```
//!
//! the iterates satisfy `‖θ_k − θ*‖² ≤ z^k (1 + z − m) ‖θ_0 − θ*‖²` with
//! `z < 1`. Gradients here are full-batch, so the expectations are exact.
//! The per-step diagonal gate matrix of the derivation is the `gate_mask`
//! recorded on every trajectory point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{first_hit, DEFAULT_HIT_TOL};
use crate::objectives::{Objective, Quadratic, QuadraticSpec};
use crate::optimizers::OptimizerKind;
use crate::run::{run, RunConfig};
use crate::vector::ParamVector;

/// Relative guard band applied to the strict region inequalities.
pub const REGION_GUARD: f64 = 1e-9;

/// Admissible (r, α) set for given curvature bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibleRegion {
    pub mu: f64,
    pub lipschitz: f64,
    /// Exclusive upper bound on the learning rate, `2μ/L²`.
    pub r_max: f64,
}

pub fn admissible_region(mu: f64, lipschitz: f64) -> Result<AdmissibleRegion> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::RegionViolation(format!("mu must be positive, got {mu}")));
    }
    if !(lipschitz >= mu && lipschitz.is_finite()) {
        return Err(Error::RegionViolation(format!(
            "L must satisfy L >= mu, got L={lipschitz}, mu={mu}"
        )));
    }
    Ok(AdmissibleRegion {
        mu,
        lipschitz,
        r_max: 2.0 * mu / (lipschitz * lipschitz),
    })
}

impl AdmissibleRegion {
    pub fn p(&self, r: f64) -> f64 {
        let l2 = self.lipschitz * self.lipschitz;
        4.0 + 4.0 * r + r * l2
    }

    pub fn q(&self, r: f64) -> f64 {
        let l2 = self.lipschitz * self.lipschitz;
        2.0 * r * self.mu - r * r * l2
    }

    /// Exclusive upper bound on α at learning rate `r`.
    pub fn alpha_max(&self, r: f64) -> f64 {
        let p = self.p(r);
        let q = self.q(r);
        (-p + (p * p + 16.0 * q).sqrt()) / 8.0
    }

    /// Checks `(r, α)` against the region, naming the first violated bound.
    pub fn check(&self, r: f64, alpha: f64) -> Result<()> {
        if !(r > 0.0) {
            return Err(Error::RegionViolation(format!("r must be > 0, got {r}")));
        }
        if !(r < self.r_max * (1.0 - REGION_GUARD)) {
            return Err(Error::RegionViolation(format!(
                "r must be < 2mu/L^2 = {}, got {r}",
                self.r_max
            )));
        }
        if !(alpha > 0.0) {
            return Err(Error::RegionViolation(format!("alpha must be > 0, got {alpha}")));
        }
        let alpha_max = self.alpha_max(r);
        if !(alpha < alpha_max * (1.0 - REGION_GUARD)) {
            return Err(Error::RegionViolation(format!(
                "alpha must be < (-p + sqrt(p^2 + 16q))/8 = {alpha_max}, got {alpha}"
            )));
        }
        Ok(())
    }

    pub fn contains(&self, r: f64, alpha: f64) -> bool {
        self.check(r, alpha).is_ok()
    }
}

/// Constants of the bound at one `(μ, L, r, α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoremParams {
    pub mu: f64,
    pub lipschitz: f64,
    pub r: f64,
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub m: f64,
    pub n: f64,
    pub z: f64,
}

impl TheoremParams {
    /// Evaluates the formulas without any region check.
    pub fn evaluate(mu: f64, lipschitz: f64, r: f64, alpha: f64) -> Self {
        let l2 = lipschitz * lipschitz;
        let p = 4.0 + 4.0 * r + r * l2;
        let q = 2.0 * r * mu - r * r * l2;
        let m = 1.0 + 3.0 * alpha + 2.0 * r * alpha + 2.0 * alpha * alpha + r * alpha * l2 + r * r * l2 - 2.0 * r * mu;
        let n = alpha + 2.0 * r * alpha + 2.0 * alpha * alpha;
        let z = (m + (m * m + 4.0 * n).sqrt()) / 2.0;
        TheoremParams {
            mu,
            lipschitz,
            r,
            alpha,
            p,
            q,
            m,
            n,
            z,
        }
    }

    /// `1 + z − m`.
    pub fn prefactor(&self) -> f64 {
        1.0 + self.z - self.m
    }

    /// Right-hand side of the bound at step `k` for initial squared distance `e0`.
    pub fn bound(&self, k: usize, e0: f64) -> f64 {
        self.z.powi(k as i32) * self.prefactor() * e0
    }

    /// `z² − m·z − n`; zero up to rounding since z is the positive root.
    pub fn root_residual(&self) -> f64 {
        self.z * self.z - self.m * self.z - self.n
    }
}

/// Evaluates the constants, requiring `(r, α)` strictly inside the region and
/// the derived conditions `z < 1`, `1 + z − m > 0`, `m + n < 1`.
pub fn theorem_constants(mu: f64, lipschitz: f64, r: f64, alpha: f64) -> Result<TheoremParams> {
    admissible_region(mu, lipschitz)?.check(r, alpha)?;
    let tp = TheoremParams::evaluate(mu, lipschitz, r, alpha);
    if !(tp.q > 0.0) {
        return Err(Error::BoundAssumption(format!("q = {} is not positive", tp.q)));
    }
    if !(tp.z < 1.0) {
        return Err(Error::BoundAssumption(format!("z = {} is not below 1", tp.z)));
    }
    if !(tp.prefactor() > 0.0) {
        return Err(Error::BoundAssumption(format!(
            "1 + z - m = {} is not positive",
            tp.prefactor()
        )));
    }
    if !(tp.m + tp.n < 1.0) {
        return Err(Error::BoundAssumption(format!(
            "m + n = {} is not below 1",
            tp.m + tp.n
        )));
    }
    Ok(tp)
}

/// Outcome of comparing a run against the bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub holds: bool,
    /// `min_k (bound_k − ‖θ_k − θ*‖²)` over `k ∈ [1, K]`.
    pub worst_margin: f64,
    /// Squared distance one unit-in-the-last-place per coordinate away from
    /// θ*: iterates cannot resolve θ* more finely than this.
    pub roundoff_floor: f64,
    pub params: TheoremParams,
}

fn ulp(x: f64) -> f64 {
    let a = x.abs();
    f64::from_bits(a.to_bits() + 1) - a
}

fn curvature<O: Objective + ?Sized>(objective: &O) -> Result<(f64, f64, ParamVector)> {
    match (
        objective.strong_convexity(),
        objective.smoothness(),
        objective.optimum(),
    ) {
        (Some(mu), Some(l), Some(opt)) => Ok((mu, l, opt)),
        _ => Err(Error::Config(format!(
            "objective '{}' does not declare mu, L and an optimum",
            objective.name()
        ))),
    }
}

/// Runs the integral-separated optimizer for `steps` iterations and checks the
/// bound at every step `k ≥ 1`.
pub fn check_bound<O: Objective + ?Sized>(
    objective: &O,
    r: f64,
    alpha: f64,
    theta0: &ParamVector,
    steps: usize,
) -> Result<BoundCheck> {
    let (mu, l, opt) = curvature(objective)?;
    let params = theorem_constants(mu, l, r, alpha)?;
    let cfg = RunConfig::new(OptimizerKind::Spi, theta0.clone())
        .with("r", r)
        .with("alpha", alpha)
        .steps(steps);
    let traj = run(objective, &cfg)?;
    let e0 = theta0.distance_sq(&opt);
    let floor: f64 = opt.iter().map(|c| (2.0 * ulp(*c)).powi(2)).sum();

    let mut holds = !traj.diverged;
    let mut worst = f64::INFINITY;
    for point in traj.points.iter().skip(1) {
        let actual = point.theta.distance_sq(&opt);
        let bound = params.bound(point.step, e0);
        worst = worst.min(bound - actual);
        if !(actual <= bound + floor) {
            holds = false;
        }
    }
    Ok(BoundCheck {
        holds,
        worst_margin: worst,
        roundoff_floor: floor,
        params,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateComparison {
    pub spi_hit: Option<usize>,
    pub mom_hit: Option<usize>,
    /// Whether any SPI step dropped momentum in some coordinate.
    pub spi_gate_fired: bool,
}

/// Steps to reach `‖θ − θ*‖ ≤ 1e−5` for SPI and plain momentum under the same
/// `(r, α, θ₀)`. `α = 0` is accepted (both reduce to gradient descent).
pub fn compare_rate_vs_mom<O: Objective + ?Sized>(
    objective: &O,
    r: f64,
    alpha: f64,
    theta0: &ParamVector,
    steps: usize,
) -> Result<RateComparison> {
    let (mu, l, opt) = curvature(objective)?;
    let region = admissible_region(mu, l)?;
    if alpha != 0.0 {
        region.check(r, alpha)?;
    } else {
        // only the learning-rate side of the region applies
        region.check(r, region.alpha_max(r) * 0.5)?;
    }
    let base = |kind| {
        RunConfig::new(kind, theta0.clone())
            .with("r", r)
            .with("alpha", alpha)
            .steps(steps)
    };
    let spi = run(objective, &base(OptimizerKind::Spi))?;
    let mom = run(objective, &base(OptimizerKind::Mom))?;
    Ok(RateComparison {
        spi_hit: first_hit(&spi, &opt, DEFAULT_HIT_TOL),
        mom_hit: first_hit(&mom, &opt, DEFAULT_HIT_TOL),
        spi_gate_fired: spi.points.iter().any(|p| p.gate_mask.iter().any(|g| !g)),
    })
}

/// One randomly drawn bound-check instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundInstance {
    pub objective: Quadratic,
    pub r: f64,
    pub alpha: f64,
    pub theta0: ParamVector,
}

/// Draws a random quadratic (dimension 1–4, coefficients in [0.5, 50]) and a
/// strictly interior `(r, α)`.
pub fn sample_instance<R: Rng>(rng: &mut R) -> BoundInstance {
    let dim = rng.random_range(1..=4);
    let diag: Vec<f64> = (0..dim).map(|_| rng.random_range(0.5..=50.0)).collect();
    let center: Vec<f64> = (0..dim).map(|_| rng.random_range(-3.0..=3.0)).collect();
    let theta0: Vec<f64> = center.iter().map(|c| c + rng.random_range(-5.0..=5.0)).collect();
    let objective = Quadratic::new(&QuadraticSpec { diag, center }).expect("positive coefficients");
    let region = admissible_region(objective.mu(), objective.lipschitz()).expect("valid curvature");
    let r = region.r_max * rng.random_range(0.01..0.99);
    let alpha = region.alpha_max(r) * rng.random_range(0.01..0.99);
    BoundInstance {
        objective,
        r,
        alpha,
        theta0: ParamVector::from(theta0),
    }
}

/// One row of the batch verification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremSuiteRow {
    pub mu: f64,
    #[serde(rename = "L")]
    pub lipschitz: f64,
    pub r: f64,
    pub alpha: f64,
    pub z: f64,
    pub bound_holds: bool,
    pub worst_margin: f64,
}

/// Checks the bound on `samples` random instances drawn from a ChaCha8 stream
/// seeded with `seed`, running each for `steps` iterations.
pub fn theorem_suite(samples: usize, seed: u64, steps: usize) -> Result<Vec<TheoremSuiteRow>> {
    if samples == 0 {
        return Err(Error::Config("samples must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let inst = sample_instance(&mut rng);
            let check = check_bound(&inst.objective, inst.r, inst.alpha, &inst.theta0, steps)?;
            Ok(TheoremSuiteRow {
                mu: inst.objective.mu(),
                lipschitz: inst.objective.lipschitz(),
                r: inst.r,
                alpha: inst.alpha,
                z: check.params.z,
                bound_holds: check.holds,
                worst_margin: check.worst_margin,
            })
        })
        .collect()
}
