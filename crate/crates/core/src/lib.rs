//! Truncated white noise on the torus and its Besov, Fourier-Besov and
//! Orlicz-type norms.
//!
//! `no_std` with `alloc`. IO, experiments and the command line live in the
//! `noiselab` crate.

#![no_std]
// `!(x > 0.0)` style checks are meant to catch NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod besov;
pub mod error;
pub mod fft;
pub mod fourier_besov;
pub mod lattice;
pub mod orlicz;
pub mod partition;
pub mod randfield;
pub mod rng;
pub mod stats;
pub mod synthesis;

pub use besov::{besov_norm, BesovParams, LevelNorm, NormReport};
pub use error::{Error, Result};
pub use fourier_besov::{fb_norms, w_stat, FbNormTriple, FbVariant};
pub use lattice::{Dim, FreqIndex, ShellKind, ShellSpec};
pub use num_complex::Complex64;
pub use orlicz::{hv_upper_bound, luxemburg_rho, theta, WeightSequence};
pub use partition::PartitionProfile;
pub use randfield::{sample_white_noise, NoiseOptions, RngSpec, SpectralField};
pub use synthesis::{block_lp_norm, synthesize_block, synthesize_block_direct, GridField, QuadratureOptions};
