use std::collections::BTreeMap;

use proptest::prelude::*;
use spiopt_core::{
    run, Objective, OptimizerKind, OptimizerState, ParamVector, Quadratic, QuadraticSpec, RunConfig, TestFunction,
    Trajectory,
};

fn quad_strategy() -> impl Strategy<Value = (Quadratic, Vec<f64>)> {
    (1usize..=4).prop_flat_map(|d| {
        (
            prop::collection::vec(0.5f64..50.0, d),
            prop::collection::vec(-3.0f64..3.0, d),
            prop::collection::vec(-5.0f64..5.0, d),
        )
            .prop_map(|(diag, center, theta0)| (Quadratic::new(&QuadraticSpec { diag, center }).unwrap(), theta0))
    })
}

fn thetas(t: &Trajectory) -> Vec<ParamVector> {
    t.thetas().cloned().collect()
}

fn base(kind: OptimizerKind, theta0: &[f64], r: f64, alpha: f64, steps: usize) -> RunConfig {
    RunConfig::new(kind, theta0.to_vec())
        .with("r", r)
        .with("alpha", alpha)
        .steps(steps)
}

/// Config carrying exactly the keys `kind` accepts.
fn configured(kind: OptimizerKind, theta0: &[f64], r: f64, alpha: f64, beta: f64, steps: usize) -> RunConfig {
    let mut cfg = RunConfig::new(kind, theta0.to_vec()).with("r", r).steps(steps);
    for key in kind.required_keys() {
        match *key {
            "alpha" => cfg = cfg.with("alpha", alpha),
            "beta" => cfg = cfg.with("beta", beta),
            "kd" => cfg = cfg.with("kd", 0.1),
            _ => {}
        }
    }
    cfg
}

fn sgd(theta0: &[f64], r: f64, steps: usize) -> RunConfig {
    RunConfig::new(OptimizerKind::Sgd, theta0.to_vec())
        .with("r", r)
        .steps(steps)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ci_boundaries_on_quadratics((q, theta0) in quad_strategy(), r in 1e-4f64..0.03, alpha in 0.0f64..0.999) {
        let sgd_t = run(&q, &sgd(&theta0, r, 60)).unwrap();
        let mom_t = run(&q, &base(OptimizerKind::Mom, &theta0, r, alpha, 60)).unwrap();
        let ci0 = run(&q, &base(OptimizerKind::Ci, &theta0, r, alpha, 60).with("beta", 0.0)).unwrap();
        let ciinf = run(&q, &base(OptimizerKind::Ci, &theta0, r, alpha, 60).with("beta", f64::INFINITY)).unwrap();
        prop_assert_eq!(thetas(&ci0), thetas(&sgd_t));
        prop_assert_eq!(thetas(&ciinf), thetas(&mom_t));
    }

    #[test]
    fn pid_without_derivative_is_momentum((q, theta0) in quad_strategy(), r in 1e-4f64..0.03, alpha in 0.0f64..0.999) {
        let mom_t = run(&q, &base(OptimizerKind::Mom, &theta0, r, alpha, 60)).unwrap();
        let pid = run(&q, &base(OptimizerKind::Pid, &theta0, r, alpha, 60).with("kd", 0.0)).unwrap();
        prop_assert_eq!(thetas(&pid), thetas(&mom_t));
    }

    #[test]
    fn zero_alpha_collapses_to_sgd((q, theta0) in quad_strategy(), r in 1e-4f64..0.03, beta in 0.0f64..10.0) {
        let reference = thetas(&run(&q, &sgd(&theta0, r, 40)).unwrap());
        for kind in [OptimizerKind::Mom, OptimizerKind::Nag, OptimizerKind::Spi] {
            let t = run(&q, &base(kind, &theta0, r, 0.0, 40)).unwrap();
            prop_assert_eq!(thetas(&t), reference.clone(), "{}", kind);
        }
        let ci = run(&q, &base(OptimizerKind::Ci, &theta0, r, 0.0, 40).with("beta", beta)).unwrap();
        prop_assert_eq!(thetas(&ci), reference);
    }

    #[test]
    fn first_step_is_a_gradient_step(
        (q, theta0) in quad_strategy(), r in 1e-4f64..0.1, alpha in 0.0f64..0.999, beta in 1e-6f64..1e3
    ) {
        let theta = ParamVector::from(theta0.clone());
        let g = q.eval(&theta).gradient;
        let expected = theta.sub_scaled(r, &g);
        for kind in [OptimizerKind::Sgd, OptimizerKind::Mom, OptimizerKind::Nag, OptimizerKind::Ci, OptimizerKind::Spi] {
            let cfg = configured(kind, &theta0, r, alpha, beta, 1);
            let t = run(&q, &cfg).unwrap();
            prop_assert_eq!(&t.points[1].theta, &expected, "{}", kind);
        }
    }

    #[test]
    fn spi_matches_mom_until_first_conflict((q, theta0) in quad_strategy(), r in 1e-4f64..0.03, alpha in 0.0f64..0.999) {
        let spi = run(&q, &base(OptimizerKind::Spi, &theta0, r, alpha, 80)).unwrap();
        let mom = run(&q, &base(OptimizerKind::Mom, &theta0, r, alpha, 80)).unwrap();
        let first_gate = spi.points.iter().position(|p| p.gate_mask.iter().any(|g| !g)).unwrap_or(spi.len());
        for k in 0..first_gate.min(mom.len()) {
            prop_assert_eq!(&spi.points[k].theta, &mom.points[k].theta);
        }
    }

    #[test]
    fn coordinate_permutation_commutes((q, theta0) in quad_strategy(), r in 1e-4f64..0.03, alpha in 0.0f64..0.999, shift in 0usize..4) {
        let d = theta0.len();
        let perm: Vec<usize> = (0..d).map(|i| (i + shift) % d).collect();
        let permuted_q = Quadratic::new(&QuadraticSpec {
            diag: perm.iter().map(|&i| q.diag()[i]).collect(),
            center: perm.iter().map(|&i| q.center()[i]).collect(),
        }).unwrap();
        let permuted_theta0: Vec<f64> = perm.iter().map(|&i| theta0[i]).collect();
        for kind in [OptimizerKind::Sgd, OptimizerKind::Mom, OptimizerKind::Nag, OptimizerKind::Ci, OptimizerKind::Spi] {
            let mk = |t0: &[f64]| configured(kind, t0, r, alpha, 5.0, 30);
            let a = run(&q, &mk(&theta0)).unwrap();
            let b = run(&permuted_q, &mk(&permuted_theta0)).unwrap();
            for (pa, pb) in a.points.iter().zip(&b.points) {
                prop_assert_eq!(pa.theta.permuted(&perm), pb.theta.clone(), "{}", kind);
            }
        }
    }

    #[test]
    fn aligned_momentum_delays_more(
        v in prop::collection::vec(-5.0f64..5.0, 1..6),
        g_mag in prop::collection::vec(0.0f64..5.0, 6),
        r in 1e-4f64..1.0,
        alpha in 1e-3f64..0.999,
    ) {
        let g: Vec<f64> = v.iter().zip(&g_mag).map(|(vi, m)| vi.signum() * m).collect();
        let mom_keys = BTreeMap::from([("r".to_string(), r), ("alpha".to_string(), alpha)]);
        let mut mom = OptimizerState::from_map(OptimizerKind::Mom, &mom_keys, v.len()).unwrap();
        mom.set_velocity(ParamVector::from(v.clone()));
        let sgd_keys = BTreeMap::from([("r".to_string(), r)]);
        let mut sgd_state = OptimizerState::from_map(OptimizerKind::Sgd, &sgd_keys, v.len()).unwrap();
        let theta = ParamVector::zeros(v.len());
        let (_, dm) = mom.step(&theta, &ParamVector::from(g.clone()));
        let (_, ds) = sgd_state.step(&theta, &ParamVector::from(g));
        for (m, s) in dm.state_delay_per_dim.iter().zip(&ds.state_delay_per_dim) {
            prop_assert!(m >= s);
        }
        prop_assert!(dm.state_delay >= ds.state_delay);
    }

    #[test]
    fn runs_are_deterministic((q, theta0) in quad_strategy(), r in 1e-4f64..0.03, alpha in 0.0f64..0.999) {
        for kind in OptimizerKind::ALL {
            let cfg = configured(kind, &theta0, r, alpha, 1.0, 20);
            let a = run(&q, &cfg).unwrap();
            let b = run(&q, &cfg).unwrap();
            prop_assert_eq!(a.points[0].theta.as_slice(), theta0.as_slice());
            prop_assert_eq!(a.points[0].loss, q.value(&ParamVector::from(theta0.clone())));
            prop_assert_eq!(a, b);
        }
    }
}

#[test]
fn ci_boundaries_on_f1_and_f2() {
    for (f, start, r) in [
        (TestFunction::F1, [-2.0, 1.0], 0.012),
        (TestFunction::F2, [4.0, 6.0], 0.001),
    ] {
        for alpha in [0.9, 0.99] {
            let sgd_t = run(&f, &sgd(&start, r, 500)).unwrap();
            let mom_t = run(&f, &base(OptimizerKind::Mom, &start, r, alpha, 500)).unwrap();
            let ci0 = run(&f, &base(OptimizerKind::Ci, &start, r, alpha, 500).with("beta", 0.0)).unwrap();
            let ciinf = run(
                &f,
                &base(OptimizerKind::Ci, &start, r, alpha, 500).with("beta", f64::INFINITY),
            )
            .unwrap();
            assert_eq!(thetas(&ci0), thetas(&sgd_t));
            assert_eq!(thetas(&ciinf), thetas(&mom_t));
        }
    }
}

#[test]
fn concurrent_runs_agree() {
    let cfg = base(OptimizerKind::Spi, &[-2.0, 1.0], 0.012, 0.99, 200);
    let reference = run(&TestFunction::F1, &cfg).unwrap();
    let handles: Vec<_> = (0..4)
        .map(|_| {
            let cfg = cfg.clone();
            std::thread::spawn(move || run(&TestFunction::F1, &cfg).unwrap())
        })
        .collect();
    for h in handles {
        assert_eq!(h.join().unwrap(), reference);
    }
}

#[test]
fn gate_mask_only_for_gating_kinds() {
    for kind in OptimizerKind::ALL {
        let cfg = configured(kind, &[-2.0, 1.0], 0.001, 0.9, 1.0, 100);
        let t = run(&TestFunction::F1, &cfg).unwrap();
        let fired = t.points.iter().any(|p| p.gate_mask.iter().any(|g| !g));
        if !kind.is_gating() {
            assert!(!fired, "{kind}");
        }
    }
}
