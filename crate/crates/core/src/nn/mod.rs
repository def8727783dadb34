//! Desk-scale neural training: logistic regression and a one-hidden-layer
//! tanh network with hand-written backpropagation.
//!
//! Weights are flattened into a single [`ParamVector`](crate::ParamVector)
//! so every optimizer applies unchanged and the gating optimizers act per
//! scalar weight.

mod dataset;
mod mlp;
mod sweep;
mod train;

pub use dataset::{encode_idx, load_idx, parse_idx, synth_gaussians, Dataset, IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC};
pub use mlp::{forward_backward, forward_backward_at, MlpModel, MlpShape};
pub use sweep::{best_accuracy, run_sweep, SweepPoint, SweepSpec};
pub use train::{train, TrainConfig, TrainReport, RNG_ALGORITHM, RNG_SEEDING};
