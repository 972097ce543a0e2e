//! Fourier-Besov norms on spectral coefficients.
//!
//! Three variants are computed side by side:
//!
//! * `sharp`: weights `(|k|+1)^s`, wide shells `2^(j-1) <= |k| <= 2^(j+1)`
//!   (level 0 is the ball `|k| <= 2`),
//! * `smooth`: weights `(|k|+1)^s` times the smooth partition `phi_j(k)`,
//! * `dyadic`: weight `2^(sj)` per level on the same wide shells.
//!
//! They satisfy `smooth <= sharp <= 3 smooth`, and `sharp` and `dyadic` are
//! within the weight ratio `(|k|+1) / 2^j in [1/2, 4]` of each other.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::besov::{is_complete, lq_norm, top_level};
use crate::lattice::ShellSpec;
use crate::partition::PartitionProfile;
use crate::randfield::SpectralField;
use crate::synthesis::check_exponent;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FbVariant {
    Sharp,
    Smooth,
    Dyadic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FbLevel {
    pub level: u32,
    pub sharp: f64,
    pub smooth: f64,
    /// Already includes the `2^(sj)` weight.
    pub dyadic: f64,
    /// Unweighted `(sum_{shell} |f^(k)|^p)^{1/p}`.
    pub shell_lp: f64,
    pub complete: bool,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FbNormTriple {
    pub sharp_value: f64,
    pub smooth_value: f64,
    pub dyadic_value: f64,
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub per_level: Vec<FbLevel>,
}

impl FbNormTriple {
    pub fn value(&self, variant: FbVariant) -> f64 {
        match variant {
            FbVariant::Sharp => self.sharp_value,
            FbVariant::Smooth => self.smooth_value,
            FbVariant::Dyadic => self.dyadic_value,
        }
    }
}

/// Is `|k|^2 = n` in the wide shell of level `j` (level 0: `|k| <= 2`)?
#[inline]
pub fn in_wide_shell(j: u32, n: u64) -> bool {
    if j == 0 {
        n <= 4
    } else {
        ShellSpec { level: j, kind: crate::lattice::ShellKind::Wide }.contains_sq(n)
    }
}

/// Levels whose wide shell can contain `|k|^2 = n`.
#[inline]
fn candidate_levels(n: u64) -> core::ops::RangeInclusive<u32> {
    if n == 0 {
        return 0..=0;
    }
    // floor(log2 |k|) from the squared norm
    let fl = (63 - n.leading_zeros()) / 2;
    fl.saturating_sub(1)..=fl + 2
}

#[derive(Clone, Copy)]
struct Acc {
    p: f64,
}

impl Acc {
    #[inline]
    fn add(&self, slot: &mut f64, x: f64) {
        if self.p.is_infinite() {
            *slot = slot.max(x);
        } else {
            *slot += libm::pow(x, self.p);
        }
    }

    #[inline]
    fn finish(&self, slot: f64) -> f64 {
        if self.p.is_infinite() {
            slot
        } else {
            libm::pow(slot, 1.0 / self.p)
        }
    }
}

/// All three Fourier-Besov variants of a truncated field. The smooth variant
/// uses the default smooth profile.
pub fn fb_norms(field: &SpectralField, s: f64, p: f64, q: f64) -> Result<FbNormTriple> {
    fb_norms_with(field, s, p, q, &PartitionProfile::smooth())
}

pub fn fb_norms_with(field: &SpectralField, s: f64, p: f64, q: f64, smooth: &PartitionProfile) -> Result<FbNormTriple> {
    check_exponent(p)?;
    check_exponent(q)?;
    if !s.is_finite() {
        return Err(Error::Config("smoothness s must be finite"));
    }
    smooth.validate()?;
    let top = top_level(field.cutoff());
    let levels = top as usize + 1;
    let acc = Acc { p };
    let mut sharp = vec![0.0; levels];
    let mut smooth_sum = vec![0.0; levels];
    let mut plain = vec![0.0; levels];
    for (n, c) in field.iter_norm_sq() {
        let modulus = c.norm();
        if modulus == 0.0 {
            continue;
        }
        let weight = libm::pow(libm::sqrt(n as f64) + 1.0, s);
        for j in candidate_levels(n) {
            if j > top {
                break;
            }
            let ji = j as usize;
            if in_wide_shell(j, n) {
                acc.add(&mut sharp[ji], weight * modulus);
                acc.add(&mut plain[ji], modulus);
            }
            let phi = smooth.phi_j_sq(j, n);
            if phi != 0.0 {
                acc.add(&mut smooth_sum[ji], weight * phi * modulus);
            }
        }
    }
    let per_level: Vec<FbLevel> = (0..levels)
        .map(|ji| {
            let shell_lp = acc.finish(plain[ji]);
            FbLevel {
                level: ji as u32,
                sharp: acc.finish(sharp[ji]),
                smooth: acc.finish(smooth_sum[ji]),
                dyadic: libm::exp2(s * ji as f64) * shell_lp,
                shell_lp,
                complete: is_complete(ji as u32, field.cutoff()),
            }
        })
        .collect();
    Ok(FbNormTriple {
        sharp_value: lq_norm(per_level.iter().map(|l| l.sharp), q),
        smooth_value: lq_norm(per_level.iter().map(|l| l.smooth), q),
        dyadic_value: lq_norm(per_level.iter().map(|l| l.dyadic), q),
        s,
        p,
        q,
        per_level,
    })
}

/// `w_{j,p} = (sum_{2^(j-1) <= |k| <= 2^(j+1)} |f^(k)|^p)^{1/p}`, `j >= 1`.
pub fn w_stat(field: &SpectralField, j: u32, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let spec = ShellSpec::wide(j)?;
    let acc = Acc { p };
    let mut sum = 0.0;
    for (n, c) in field.iter_norm_sq() {
        if spec.contains_sq(n) {
            acc.add(&mut sum, c.norm());
        }
    }
    Ok(acc.finish(sum))
}

/// Bracket `[lo, hi]` with `lo * dyadic <= sharp <= hi * dyadic`: the range of
/// `((|k|+1)/2^j)^s` over `(|k|+1)/2^j in [1/2, 4]`. For `s <= 0` this is
/// `[4^(-|s|), 2^(|s|)]`.
pub fn dyadic_bracket(s: f64) -> (f64, f64) {
    let a = libm::exp2(-s);
    let b = libm::exp2(2.0 * s);
    (a.min(b), a.max(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Dim, FreqIndex};
    use crate::randfield::{sample_white_noise, NoiseOptions, RngSpec};
    use num_complex::Complex64;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn constant_field() {
        let f = SpectralField::single_mode(FreqIndex::zero(Dim::new(2).unwrap()), one(), 8).unwrap();
        for (s, p, q) in [(-1.0, 1.0, 1.0), (0.5, 2.0, f64::INFINITY), (0.0, f64::INFINITY, 2.0)] {
            let t = fb_norms(&f, s, p, q).unwrap();
            assert_eq!(t.sharp_value, 1.0);
            assert_eq!(t.smooth_value, 1.0);
            assert_eq!(t.dyadic_value, 1.0);
        }
    }

    #[test]
    fn shell_overlap_counts_three_times() {
        for j in 1..6u32 {
            let f = SpectralField::single_mode(FreqIndex::new(&[1 << j]).unwrap(), one(), 1 << 7).unwrap();
            for p in [1.0, 2.0, 4.0] {
                for q in [1.0, 2.0, 3.0] {
                    let t = fb_norms(&f, 0.0, p, q).unwrap();
                    assert!((t.dyadic_value - 3f64.powf(1.0 / q)).abs() < 1e-14, "j={j} q={q}");
                }
            }
        }
    }

    #[test]
    fn w_stat_examples() {
        let mut f = SpectralField::zeros(Dim::new(1).unwrap(), 16).unwrap();
        f.map(|_| one());
        for p in [1.0, 2.0, 3.0] {
            assert!((w_stat(&f, 2, p).unwrap() - 14f64.powf(1.0 / p)).abs() < 1e-12);
        }
        let z = SpectralField::zeros(Dim::new(1).unwrap(), 16).unwrap();
        assert_eq!(w_stat(&z, 3, 2.0).unwrap(), 0.0);
        assert!(w_stat(&z, 0, 2.0).is_err());
    }

    #[test]
    fn candidate_levels_cover_membership() {
        for n in 0..20000u64 {
            for j in 0..12u32 {
                if in_wide_shell(j, n) {
                    assert!(candidate_levels(n).contains(&j), "n={n} j={j}");
                }
                if PartitionProfile::smooth().phi_j_sq(j, n) != 0.0 {
                    assert!(candidate_levels(n).contains(&j), "smooth n={n} j={j}");
                }
            }
        }
    }

    #[test]
    fn inequalities_on_noise() {
        let f = sample_white_noise(Dim::new(1).unwrap(), 100, RngSpec { seed: 3 }, 0, NoiseOptions::default()).unwrap();
        for s in [-1.0, -0.5, 0.0, 0.5] {
            for p in [1.0, 2.0, f64::INFINITY] {
                for q in [1.0, f64::INFINITY] {
                    let t = fb_norms(&f, s, p, q).unwrap();
                    assert!(t.smooth_value <= t.sharp_value * (1.0 + 1e-12));
                    assert!(t.sharp_value <= 3.0 * t.smooth_value * (1.0 + 1e-12));
                    let (lo, hi) = dyadic_bracket(s);
                    assert!(lo * t.dyadic_value <= t.sharp_value * (1.0 + 1e-12));
                    assert!(t.sharp_value <= hi * t.dyadic_value * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn bracket_matches_nonpositive_formula() {
        for s in [-1.0, -0.5, 0.0] {
            let (lo, hi) = dyadic_bracket(s);
            assert!((lo - 4f64.powf(-s.abs())).abs() < 1e-15);
            assert!((hi - 2f64.powf(s.abs())).abs() < 1e-15);
        }
    }
}
