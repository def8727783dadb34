//! Oscillation and convergence-speed metrics over trajectories.
//!
//! All functions are pure. Hit and settle metrics are absent (`None`) for
//! diverged trajectories; comparing absent values is an error rather than a
//! sentinel.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::run::Trajectory;
use crate::vector::{sgn, ParamVector};

pub const DEFAULT_SETTLE_TOL: f64 = 1e-2;
pub const DEFAULT_HIT_TOL: f64 = 1e-5;

/// Oscillation summary for one coordinate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionReport {
    /// Largest `|θᵢ − θ*ᵢ|` from the first optimum crossing onward; 0 when the
    /// residual never changes sign.
    pub max_overshoot: f64,
    /// First step on the far side of the optimum.
    pub t1: Option<usize>,
    /// Step of the peak overshoot.
    pub t2: Option<usize>,
    pub settling_time: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillationReport {
    pub per_dimension: Vec<DimensionReport>,
    pub settle_tol: f64,
    pub residual_threshold: f64,
    /// Settling time over all coordinates.
    pub settling_time: Option<usize>,
    /// First step with `‖θ − θ*‖₂ ≤ residual_threshold`.
    pub hit_epoch_residual: Option<usize>,
}

fn residuals(traj: &Trajectory, optimum: &ParamVector, i: usize) -> Vec<f64> {
    traj.thetas().map(|t| t[i] - optimum[i]).collect()
}

fn check_dims(traj: &Trajectory, optimum: &ParamVector) -> Result<()> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if traj.dim() != optimum.dim() {
        return Err(Error::DimensionMismatch {
            expected: traj.dim(),
            got: optimum.dim(),
        });
    }
    Ok(())
}

/// (max overshoot, t1, t2) of a scalar residual sequence.
fn overshoot_of(res: &[f64]) -> (f64, Option<usize>, Option<usize>) {
    let Some(reference) = res.iter().map(|r| sgn(*r)).find(|s| *s != 0.0) else {
        return (0.0, None, None);
    };
    let Some(t1) = res.iter().position(|r| sgn(*r) == -reference) else {
        return (0.0, None, None);
    };
    let mut peak = (res[t1].abs(), t1);
    for (t, r) in res.iter().enumerate().skip(t1 + 1) {
        if r.abs() > peak.0 {
            peak = (r.abs(), t);
        }
    }
    (peak.0, Some(t1), Some(peak.1))
}

/// Smallest index from which every flag is true, `None` if the last is false.
fn settle_index(within: impl DoubleEndedIterator<Item = bool> + ExactSizeIterator) -> Option<usize> {
    let n = within.len();
    let tail = within.rev().take_while(|w| *w).count();
    (tail > 0).then(|| n - tail)
}

/// Per-dimension maximum overshoot.
pub fn overshoot(traj: &Trajectory, optimum: &ParamVector) -> Result<Vec<f64>> {
    check_dims(traj, optimum)?;
    Ok((0..optimum.dim())
        .map(|i| overshoot_of(&residuals(traj, optimum, i)).0)
        .collect())
}

/// First step after which every coordinate stays within `tol` of the optimum.
pub fn settling_time(traj: &Trajectory, optimum: &ParamVector, tol: f64) -> Option<usize> {
    assert!(tol > 0.0, "settling tolerance must be positive");
    if traj.diverged || traj.is_empty() {
        return None;
    }
    settle_index(
        traj.thetas()
            .map(|t| t.iter().zip(optimum).all(|(x, o)| (x - o).abs() <= tol))
            .collect::<Vec<_>>()
            .into_iter(),
    )
}

/// First step with `‖θ_t − θ*‖₂ ≤ tol`.
pub fn first_hit(traj: &Trajectory, optimum: &ParamVector, tol: f64) -> Option<usize> {
    assert!(tol > 0.0, "hit tolerance must be positive");
    if traj.diverged {
        return None;
    }
    traj.thetas().position(|t| t.distance(optimum) <= tol)
}

/// `(reference − candidate) / reference`.
pub fn epoch_reduction_ratio(candidate: Option<usize>, reference: Option<usize>) -> Result<f64> {
    match (candidate, reference) {
        (Some(c), Some(r)) if r >= 1 => Ok((r as f64 - c as f64) / r as f64),
        (Some(_), Some(_)) => Err(Error::UndefinedComparison("reference epoch must be at least 1".into())),
        _ => Err(Error::UndefinedComparison(
            "epoch reduction needs both epochs present".into(),
        )),
    }
}

/// `(e_other − e_spi) / e_other`.
pub fn error_reduction_ratio(e_spi: f64, e_other: f64) -> Result<f64> {
    if !(e_other > 0.0) {
        return Err(Error::UndefinedComparison(format!(
            "reference error must be positive, got {e_other}"
        )));
    }
    Ok((e_other - e_spi) / e_other)
}

/// Full oscillation report for one trajectory.
pub fn oscillation_report(
    traj: &Trajectory,
    optimum: &ParamVector,
    settle_tol: f64,
    hit_tol: f64,
) -> Result<OscillationReport> {
    check_dims(traj, optimum)?;
    let per_dimension = (0..optimum.dim())
        .map(|i| {
            let res = residuals(traj, optimum, i);
            let (max_overshoot, t1, t2) = overshoot_of(&res);
            let settling_time = if traj.diverged {
                None
            } else {
                settle_index(res.iter().map(|r| r.abs() <= settle_tol))
            };
            DimensionReport {
                max_overshoot,
                t1,
                t2,
                settling_time,
            }
        })
        .collect();
    Ok(OscillationReport {
        per_dimension,
        settle_tol,
        residual_threshold: hit_tol,
        settling_time: settling_time(traj, optimum, settle_tol),
        hit_epoch_residual: first_hit(traj, optimum, hit_tol),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn scalar_traj(res: &[f64]) -> Trajectory {
        Trajectory::from_thetas(res.iter().map(|r| ParamVector::from([*r])))
    }

    #[test]
    fn overshoot_examples() {
        let zero = ParamVector::from([0.0]);
        let mono = scalar_traj(&[1.0, 0.5, 0.1, 0.01]);
        assert_eq!(overshoot(&mono, &zero).unwrap(), vec![0.0]);
        let osc = scalar_traj(&[1.0, -0.4, 0.2, -0.05]);
        assert_eq!(overshoot(&osc, &zero).unwrap(), vec![0.4]);
        let report = oscillation_report(&osc, &zero, 0.1, 1e-5).unwrap();
        assert_eq!(report.per_dimension[0].t1, Some(1));
        assert_eq!(report.per_dimension[0].t2, Some(1));
        assert_eq!(overshoot(&Trajectory::default(), &zero), Err(Error::EmptyTrajectory));
    }

    #[test]
    fn overshoot_peak_can_come_later() {
        let zero = ParamVector::from([0.0]);
        let t = scalar_traj(&[-1.0, 0.0, 0.1, 0.3, -0.2]);
        let r = oscillation_report(&t, &zero, 0.01, 1e-5).unwrap();
        assert_eq!(r.per_dimension[0].max_overshoot, 0.3);
        assert_eq!(r.per_dimension[0].t1, Some(2));
        assert_eq!(r.per_dimension[0].t2, Some(3));
    }

    #[test]
    fn settling_examples() {
        let zero = ParamVector::from([0.0]);
        let still = scalar_traj(&[0.0, 0.0, 0.0]);
        assert_eq!(settling_time(&still, &zero, 1e-2), Some(0));
        let t = scalar_traj(&[1.0, 0.009, 0.5, 0.009, 0.009, 0.009]);
        assert_eq!(settling_time(&t, &zero, 1e-2), Some(3));
        let never = scalar_traj(&[1.0, 0.5, 0.2]);
        assert_eq!(settling_time(&never, &zero, 1e-2), None);
    }

    #[test]
    fn first_hit_examples() {
        let zero = ParamVector::from([0.0, 0.0]);
        let start_inside = Trajectory::from_thetas(vec![ParamVector::from([1e-6, 0.0])]);
        assert_eq!(first_hit(&start_inside, &zero, 1e-5), Some(0));
        let never = Trajectory::from_thetas(vec![ParamVector::from([1.0, 0.0]); 4]);
        assert_eq!(first_hit(&never, &zero, 1e-5), None);
    }

    #[test]
    fn diverged_trajectories_have_no_hits() {
        let zero = ParamVector::from([0.0]);
        let mut t = scalar_traj(&[1.0, 0.0, f64::INFINITY]);
        t.diverged = true;
        t.diverged_at = Some(2);
        assert_eq!(first_hit(&t, &zero, 1e-5), None);
        assert_eq!(settling_time(&t, &zero, 1e-2), None);
    }

    #[test]
    fn ratios() {
        assert_eq!(epoch_reduction_ratio(Some(50), Some(100)).unwrap(), 0.5);
        assert_eq!(epoch_reduction_ratio(Some(100), Some(100)).unwrap(), 0.0);
        assert!(matches!(
            epoch_reduction_ratio(None, Some(100)),
            Err(Error::UndefinedComparison(_))
        ));
        assert!(epoch_reduction_ratio(Some(1), Some(0)).is_err());
        assert_relative_eq!(error_reduction_ratio(1.070, 1.111).unwrap(), 0.0369, epsilon = 1e-4);
        assert_eq!(error_reduction_ratio(0.7, 0.7).unwrap(), 0.0);
        assert_relative_eq!(error_reduction_ratio(20.890, 23.392).unwrap(), 0.1070, epsilon = 1e-4);
        assert!(error_reduction_ratio(1.0, 0.0).is_err());
    }
}
