//! Periodic Besov norms of truncated fields, assembled from Littlewood-Paley
//! block norms, and the `p = 2` Sobolev norm.
//!
//! A level `j` is *complete* when `2^(j+1) <= N`: the whole support of `phi_j`
//! lies inside the stored ball. Levels with `2^(j-1) > N` vanish identically
//! and are dropped. Incomplete levels are still computed and reported, but
//! `value` is assembled from complete levels only.

use alloc::vec::Vec;

use crate::error::Result;
use crate::partition::PartitionProfile;
use crate::randfield::SpectralField;
use crate::synthesis::{block_lp_norm, check_exponent, QuadratureOptions};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BesovParams {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub profile: PartitionProfile,
    pub osf: usize,
    pub quadrature_tol: f64,
}

impl BesovParams {
    pub fn new(s: f64, p: f64, q: f64) -> Self {
        BesovParams {
            s,
            p,
            q,
            profile: PartitionProfile::Sharp,
            osf: 4,
            quadrature_tol: 1e-6,
        }
    }

    pub fn with_profile(mut self, profile: PartitionProfile) -> Self {
        self.profile = profile;
        self
    }

    pub fn quadrature(&self) -> QuadratureOptions {
        QuadratureOptions {
            osf: self.osf,
            tol: self.quadrature_tol,
            ..QuadratureOptions::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LevelNorm {
    pub level: u32,
    /// `||f_j||_{L^p}`.
    pub block_norm: f64,
    /// `2^(js) ||f_j||_{L^p}`.
    pub weighted: f64,
    pub complete: bool,
    pub approximate: bool,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormReport {
    /// Norm over complete levels.
    pub value: f64,
    /// Norm over every nonzero level, incomplete ones included.
    pub value_all_levels: f64,
    pub per_level: Vec<LevelNorm>,
    pub complete_levels: Vec<u32>,
    /// True if some level used the `p = inf` grid maximum.
    pub approximate: bool,
    pub params: BesovParams,
}

pub fn is_complete(level: u32, cutoff: u32) -> bool {
    level < 31 && (1u64 << (level + 1)) <= cutoff as u64
}

/// Highest level whose block can be nonzero: largest `j` with `2^(j-1) <= N`.
pub fn top_level(cutoff: u32) -> u32 {
    if cutoff == 0 {
        0
    } else {
        (31 - cutoff.leading_zeros()) + 1
    }
}

/// Unweighted block norms `||f_j||_{L^p}` for `j = 0..=top_level(N)`.
pub fn block_norms(field: &SpectralField, profile: &PartitionProfile, p: f64, opts: &QuadratureOptions) -> Result<Vec<LevelNorm>> {
    check_exponent(p)?;
    profile.validate()?;
    (0..=top_level(field.cutoff()))
        .map(|j| {
            let b = block_lp_norm(field, profile, j, p, opts)?;
            Ok(LevelNorm {
                level: j,
                block_norm: b.value,
                weighted: b.value,
                complete: is_complete(j, field.cutoff()),
                approximate: b.approximate,
            })
        })
        .collect()
}

/// `l^q` norm of a finite sequence, `max` for `q = inf`.
pub fn lq_norm(values: impl Iterator<Item = f64>, q: f64) -> f64 {
    if q.is_infinite() {
        values.fold(0.0, f64::max)
    } else {
        libm::pow(values.map(|v| libm::pow(v, q)).sum::<f64>(), 1.0 / q)
    }
}

/// Applies the smoothness weights `2^(js)` to precomputed block norms and
/// assembles the report. Lets one set of blocks serve many `(s, q)` pairs.
pub fn assemble(levels: &[LevelNorm], params: BesovParams) -> NormReport {
    let per_level: Vec<LevelNorm> = levels
        .iter()
        .map(|l| LevelNorm {
            weighted: libm::exp2(params.s * l.level as f64) * l.block_norm,
            ..*l
        })
        .collect();
    let value = lq_norm(per_level.iter().filter(|l| l.complete).map(|l| l.weighted), params.q);
    let value_all_levels = lq_norm(per_level.iter().map(|l| l.weighted), params.q);
    NormReport {
        value,
        value_all_levels,
        complete_levels: per_level.iter().filter(|l| l.complete).map(|l| l.level).collect(),
        approximate: per_level.iter().any(|l| l.approximate),
        per_level,
        params,
    }
}

/// `||f||_{B^s_{p,q}(T^d)}`.
pub fn besov_norm(field: &SpectralField, params: &BesovParams) -> Result<NormReport> {
    check_exponent(params.q)?;
    let levels = block_norms(field, &params.profile, params.p, &params.quadrature())?;
    Ok(assemble(&levels, *params))
}

/// `||f||_{H^{s,2}} = (2 pi)^{d/2} (sum_k (1 + |k|^2)^s |f^(k)|^2)^{1/2}`.
pub fn sobolev_h2_norm(field: &SpectralField, s: f64) -> f64 {
    let sum: f64 = field
        .iter_norm_sq()
        .map(|(n, c)| libm::pow(1.0 + n as f64, s) * c.norm_sqr())
        .sum();
    libm::pow(core::f64::consts::TAU, field.dim().get() as f64 / 2.0) * libm::sqrt(sum)
}
