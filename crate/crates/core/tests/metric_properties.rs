use proptest::prelude::*;
use spiopt_core::{
    first_hit, oscillation_report, overshoot, run, settling_time, OptimizerKind, ParamVector, RunConfig, TestFunction,
    Trajectory,
};

fn scalar(res: &[f64]) -> Trajectory {
    Trajectory::from_thetas(res.iter().map(|r| ParamVector::from([*r])))
}

fn path(dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, dim), 1..60)
}

proptest! {
    #[test]
    fn settling_is_antitone_in_tolerance(p in path(2), t1 in 1e-3f64..0.5, t2 in 1e-3f64..0.5) {
        let traj = Trajectory::from_thetas(p.into_iter().map(ParamVector::from));
        let zero = ParamVector::zeros(2);
        let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        if let (Some(a), Some(b)) = (settling_time(&traj, &zero, lo), settling_time(&traj, &zero, hi)) {
            prop_assert!(a >= b);
        }
    }

    #[test]
    fn first_hit_precedes_settling_in_one_dimension(p in path(1), tol in 1e-3f64..0.5) {
        let traj = Trajectory::from_thetas(p.into_iter().map(ParamVector::from));
        let zero = ParamVector::zeros(1);
        if let (Some(h), Some(s)) = (first_hit(&traj, &zero, tol), settling_time(&traj, &zero, tol)) {
            prop_assert!(h <= s);
        }
    }

    /// In d dimensions the per-coordinate band of width tol fits inside the
    /// Euclidean ball of radius tol·√d.
    #[test]
    fn first_hit_precedes_settling_with_scaled_ball(p in path(3), tol in 1e-3f64..0.5) {
        let traj = Trajectory::from_thetas(p.into_iter().map(ParamVector::from));
        let zero = ParamVector::zeros(3);
        if let Some(s) = settling_time(&traj, &zero, tol) {
            let h = first_hit(&traj, &zero, tol * 3f64.sqrt() * (1.0 + 1e-12)).unwrap();
            prop_assert!(h <= s);
        }
    }

    #[test]
    fn monotone_residuals_never_overshoot(start in 0.01f64..10.0, decay in prop::collection::vec(0.0f64..1.0, 1..40), negative in any::<bool>()) {
        let sign = if negative { -1.0 } else { 1.0 };
        let mut r = start;
        let mut seq = vec![sign * r];
        for d in decay {
            r *= d;
            seq.push(sign * r);
        }
        prop_assert_eq!(overshoot(&scalar(&seq), &ParamVector::from([0.0])).unwrap(), vec![0.0]);
    }

    #[test]
    fn metrics_are_pure(p in path(2)) {
        let traj = Trajectory::from_thetas(p.into_iter().map(ParamVector::from));
        let zero = ParamVector::zeros(2);
        let a = oscillation_report(&traj, &zero, 0.05, 1e-3).unwrap();
        let b = oscillation_report(&traj, &zero, 0.05, 1e-3).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn equal_tolerance_counterexample_in_two_dimensions() {
    // inside the per-coordinate band from step 0, inside the L2 ball only at step 1
    let traj = Trajectory::from_thetas([ParamVector::from([0.009, 0.009]), ParamVector::from([0.0, 0.0])]);
    let zero = ParamVector::zeros(2);
    assert_eq!(settling_time(&traj, &zero, 1e-2), Some(0));
    assert_eq!(first_hit(&traj, &zero, 1e-2), Some(1));
}

#[test]
fn crafted_settling_sequence() {
    let t = scalar(&[1.0, 0.009, 0.5, 0.009, 0.009, 0.009]);
    assert_eq!(settling_time(&t, &ParamVector::from([0.0]), 1e-2), Some(3));
}

#[test]
fn momentum_overshoots_on_f1() {
    let opt = ParamVector::from([0.0, 0.0]);
    for alpha in [0.9, 0.99] {
        let mk = |kind| {
            RunConfig::new(kind, [-2.0, 1.0])
                .with("r", 0.012)
                .with("alpha", alpha)
                .steps(50)
        };
        let mom = run(&TestFunction::F1, &mk(OptimizerKind::Mom)).unwrap();
        let nag = run(&TestFunction::F1, &mk(OptimizerKind::Nag)).unwrap();
        let mom_o = overshoot(&mom, &opt).unwrap();
        let nag_o = overshoot(&nag, &opt).unwrap();
        assert!(mom_o[0] > 0.0, "horizontal residual must cross zero");
        assert!(nag_o[0] <= mom_o[0], "alpha {alpha}: {nag_o:?} vs {mom_o:?}");
    }
}
