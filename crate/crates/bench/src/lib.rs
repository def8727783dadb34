//! Fixed workloads shared by the benchmarks.

use spiopt_core::nn::{synth_gaussians, Dataset, MlpModel, MlpShape};
use spiopt_core::{OptimizerKind, RunConfig};

/// Every first-order rule with hyperparameters that keep f1 stable at r = 0.012.
pub fn f1_config(kind: OptimizerKind, steps: usize) -> RunConfig {
    let c = RunConfig::new(kind, [-2.0, 1.0]).with("r", 0.012).steps(steps);
    match kind {
        OptimizerKind::Sgd | OptimizerKind::Adam | OptimizerKind::RmsProp => c,
        OptimizerKind::Ci => c.with("alpha", 0.9).with("beta", 10.0),
        OptimizerKind::Pid => c.with("alpha", 0.9).with("kd", 1.0),
        _ => c.with("alpha", 0.9),
    }
}

pub const ALL_KINDS: [OptimizerKind; 9] = [
    OptimizerKind::Sgd,
    OptimizerKind::Mom,
    OptimizerKind::Nag,
    OptimizerKind::Spi,
    OptimizerKind::Ci,
    OptimizerKind::Pid,
    OptimizerKind::Adam,
    OptimizerKind::RmsProp,
    OptimizerKind::AddSign,
];

/// Two Gaussian blobs and a 2-16-2 network.
pub fn mlp_workload() -> (MlpModel, Dataset) {
    let data = synth_gaussians(256, 2, 4.0, 3).expect("valid dataset");
    let model = MlpModel::init(MlpShape::new(2, 16, 2).expect("valid shape"), 0.5, 11).expect("valid init");
    (model, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use spiopt_core::{run, TestFunction};

    #[test]
    fn workloads_build() {
        for kind in ALL_KINDS {
            assert!(f1_config(kind, 10).build_state().is_ok(), "{kind}");
            assert!(!run(&TestFunction::F1, &f1_config(kind, 10)).unwrap().diverged);
        }
        let (model, data) = mlp_workload();
        assert_eq!(data.len(), 512);
        assert_eq!(model.params().dim(), 2 * 16 + 16 + 16 * 2 + 2);
    }
}
