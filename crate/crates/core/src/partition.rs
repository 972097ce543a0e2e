//! Dyadic partitions of unity on the lattice.
//!
//! Two radial profiles are provided. `Sharp` is the indicator of
//! `(2^(-1/2), 2^(1/2)]`, which partitions `Z^d \ B(0, sqrt 2)` exactly into the
//! narrow shells and equals one on each of them. `Smooth` is the usual
//! difference `eta(r) - eta(2r)` of a `C^inf` cutoff `eta` that is one on
//! `[0, a]` and zero on `[b, inf)`.
//!
//! In both cases `phi_0` is computed as one minus the sum of the higher
//! levels, so the telescoping identity holds by construction.

use crate::error::{Error, Result};
use crate::lattice::{for_each_in_ball, Dim, FreqIndex};

const SQRT_2: f64 = core::f64::consts::SQRT_2;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum PartitionProfile {
    #[default]
    Sharp,
    /// `plateau` is where `eta` stops being one, `support` where it reaches zero.
    Smooth { plateau: f64, support: f64 },
}

fn h(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        libm::exp(-1.0 / x)
    }
}

/// Smooth step: 0 for `x <= 0`, 1 for `x >= 1`.
fn smooth_step(x: f64) -> f64 {
    let a = h(x);
    let b = h(1.0 - x);
    a / (a + b)
}

impl PartitionProfile {
    pub fn sharp() -> Self {
        PartitionProfile::Sharp
    }

    pub fn smooth() -> Self {
        PartitionProfile::Smooth {
            plateau: SQRT_2,
            support: 2.0,
        }
    }

    /// Smooth profile with custom edges; requires `sqrt 2 <= a < b <= 2`.
    pub fn smooth_with(plateau: f64, support: f64) -> Result<Self> {
        let p = PartitionProfile::Smooth { plateau, support };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PartitionProfile::Sharp => Ok(()),
            PartitionProfile::Smooth { plateau, support } => {
                // a tiny slack so that a = sqrt(2) typed as 1.4142135623730951 passes
                if plateau >= SQRT_2 * (1.0 - 1e-15) && plateau < support && support <= 2.0 {
                    Ok(())
                } else {
                    Err(Error::Config("smooth profile requires sqrt(2) <= a < b <= 2"))
                }
            }
        }
    }

    pub fn is_sharp(&self) -> bool {
        matches!(self, PartitionProfile::Sharp)
    }

    fn eta(plateau: f64, support: f64, r: f64) -> f64 {
        if r <= plateau {
            1.0
        } else if r >= support {
            0.0
        } else {
            smooth_step((support - r) / (support - plateau))
        }
    }

    /// The radial profile `phi(r)`, `r >= 0`.
    pub fn phi(&self, r: f64) -> f64 {
        match *self {
            PartitionProfile::Sharp => {
                let r2 = r * r;
                if r2 > 0.5 && r2 <= 2.0 {
                    1.0
                } else {
                    0.0
                }
            }
            PartitionProfile::Smooth { plateau, support } => {
                Self::eta(plateau, support, r) - Self::eta(plateau, support, 2.0 * r)
            }
        }
    }

    /// `phi_j` at a lattice point given by its squared norm.
    pub fn phi_j_sq(&self, j: u32, norm_sq: u64) -> f64 {
        if j == 0 {
            let mut tail = 0.0;
            let mut l = 1;
            // phi_l vanishes once 2^(l-1) >= |k|
            while l < 64 && (1u128 << (2 * l - 2)) < norm_sq as u128 {
                tail += self.phi_j_sq(l, norm_sq);
                l += 1;
            }
            return 1.0 - tail;
        }
        match *self {
            PartitionProfile::Sharp => {
                if j > 31 {
                    return 0.0;
                }
                let n = norm_sq as u128;
                if n > 1u128 << (2 * j - 1) && n <= 1u128 << (2 * j + 1) {
                    1.0
                } else {
                    0.0
                }
            }
            PartitionProfile::Smooth { .. } => {
                let r = libm::sqrt(norm_sq as f64) / libm::exp2(j as f64);
                self.phi(r)
            }
        }
    }

    pub fn phi_j(&self, j: u32, k: &FreqIndex) -> f64 {
        self.phi_j_sq(j, k.norm_sq())
    }

    /// `sum_k phi_j(k)^2` over `Z^d`.
    pub fn phi_sq_sum(&self, j: u32, dim: Dim) -> f64 {
        let mut acc = 0.0;
        for_each_in_ball(dim, 1u64 << (2 * j + 2), |k| {
            let w = self.phi_j_sq(j, k.norm_sq());
            acc += w * w;
        });
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(d: usize) -> Dim {
        Dim::new(d).unwrap()
    }

    #[test]
    fn sharp_values() {
        let p = PartitionProfile::sharp();
        assert_eq!(p.phi(1.0), 1.0);
        assert_eq!(p.phi(2.1), 0.0);
        assert_eq!(p.phi(1.414), 1.0);
        assert_eq!(p.phi(1.415), 0.0);
        assert_eq!(p.phi(0.5), 0.0);
        assert_eq!(p.phi_j_sq(1, 4), 1.0);
        assert_eq!(p.phi_j_sq(1, 9), 0.0);
        assert_eq!(p.phi_j_sq(0, 0), 1.0);
        assert_eq!(PartitionProfile::smooth().phi_j_sq(0, 0), 1.0);
    }

    #[test]
    fn smooth_telescopes() {
        let p = PartitionProfile::smooth();
        let s = p.phi(1.2) + p.phi(0.6) + p.phi(2.4);
        assert!((s - 1.0).abs() < 1e-15, "{s}");
        assert_eq!(p.phi(1.2), 1.0 - p.phi(0.6));
        for r in [0.1, 0.7, 1.0, 1.3, 1.99, 2.0, 3.0] {
            assert!((0.0..=1.0).contains(&p.phi(r)));
        }
        assert_eq!(p.phi(0.70), 0.0);
        assert_eq!(p.phi(2.0), 0.0);
        assert_eq!(p.phi(1.0), 1.0);
        assert_eq!(p.phi(1.4), 1.0);
    }

    #[test]
    fn smooth_rejects_bad_edges() {
        assert!(PartitionProfile::smooth_with(1.2, 2.0).is_err());
        assert!(PartitionProfile::smooth_with(1.8, 1.7).is_err());
        assert!(PartitionProfile::smooth_with(1.5, 2.5).is_err());
        assert!(PartitionProfile::smooth_with(1.5, 1.9).is_ok());
        assert!(PartitionProfile::smooth_with(SQRT_2, 2.0).is_ok());
    }

    #[test]
    fn phi_sq_sum_examples() {
        let p = PartitionProfile::sharp();
        assert_eq!(p.phi_sq_sum(1, dim(1)), 2.0);
        assert_eq!(p.phi_sq_sum(0, dim(1)), 3.0);
        let s = PartitionProfile::smooth();
        for j in 1..8u32 {
            let v = s.phi_sq_sum(j, dim(1));
            let scale = (1u64 << j) as f64;
            let lo = (1..5000).filter(|&k| (1.0..=SQRT_2).contains(&(k as f64 / scale))).count() * 2;
            let hi = (1..5000)
                .filter(|&k| (core::f64::consts::FRAC_1_SQRT_2..=2.0).contains(&(k as f64 / scale)))
                .count()
                * 2;
            assert!(v >= lo as f64 && v <= hi as f64, "j={j} v={v} [{lo},{hi}]");
        }
    }

    #[test]
    fn partition_identity_on_lattice() {
        for profile in [PartitionProfile::sharp(), PartitionProfile::smooth(), PartitionProfile::smooth_with(1.6, 1.9).unwrap()] {
            for d in 1..=2 {
                let big_j = 6;
                for_each_in_ball(dim(d), 1 << (2 * big_j), |k| {
                    let n = k.norm_sq();
                    if n == 0 {
                        return;
                    }
                    let total: f64 = (0..=big_j + 1).map(|j| profile.phi_j_sq(j, n)).sum();
                    assert!((total - 1.0).abs() < 1e-12, "{k:?} {total}");
                    for j in 0..=big_j + 1 {
                        let w = profile.phi_j_sq(j, n);
                        assert!((-1e-15..=1.0 + 1e-15).contains(&w));
                        if n > 1 << (2 * j + 2) || (j >= 1 && 4 * n < 1 << (2 * j)) {
                            assert!(w.abs() < 1e-15, "support j={j} {k:?}");
                        }
                    }
                });
            }
        }
    }

    #[test]
    fn sharp_is_one_on_narrow_shells() {
        use crate::lattice::ShellSpec;
        let p = PartitionProfile::sharp();
        for j in 1..=10 {
            let spec = ShellSpec::narrow(j).unwrap();
            for_each_in_ball(dim(2), spec.outer_radius_sq(), |k| {
                let inside = spec.contains_sq(k.norm_sq());
                assert_eq!(p.phi_j(j, &k), if inside { 1.0 } else { 0.0 });
            });
        }
    }

    #[test]
    fn smooth_profile_has_no_jumps() {
        let p = PartitionProfile::smooth();
        let h = 1e-4;
        let mut r = 0.5;
        let mut worst: f64 = 0.0;
        while r <= 2.05 {
            let d2 = (p.phi(r + h) - 2.0 * p.phi(r) + p.phi(r - h)) / (h * h);
            worst = worst.max(d2.abs());
            r += h;
        }
        assert!(worst < 500.0, "{worst}");
        // the sharp one does jump
        let s = PartitionProfile::sharp();
        let x = core::f64::consts::FRAC_1_SQRT_2;
        assert!(((s.phi(x + h) - 2.0 * s.phi(x) + s.phi(x - h)) / (h * h)).abs() > 1e6);
    }
}
