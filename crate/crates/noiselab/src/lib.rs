//! Experiments, file formats and the command line on top of `noiselab-core`.

// `!(x > 0.0)` style checks are meant to catch NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod field_io;
pub mod output;

pub use config::{ExperimentConfig, ExperimentKind, Exponent, RawConfig, Space};
pub use error::{AppError, Result};
pub use experiments::{run, run_with_threads, ExperimentOutput, ExperimentSummary, Verdict};
