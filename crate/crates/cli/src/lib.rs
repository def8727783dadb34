//! Experiment runner behind the `spiopt` binary.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod nn_suite;
pub mod output;
pub mod plot;
pub mod race;
pub mod suites;
