//! The Orlicz function `Theta(x) = x^2 exp(-1/(2x^2))` and the Luxemburg norm
//! of nonnegative sequences.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Root of `Theta(u) = 1`.
pub const THETA_UNIT_ROOT: f64 = 1.192_279_302_799_103_7;

pub const DEFAULT_TOL: f64 = 1e-10;

/// Longest prefix pulled from a lazy sequence before giving up.
pub const MAX_LAZY_TERMS: usize = 1 << 24;

pub fn theta(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    x * x * libm::exp(-0.5 / (x * x))
}

type Entry = Box<dyn Fn(usize) -> f64 + Send + Sync>;

pub enum WeightSequence {
    Finite(Vec<f64>),
    /// `entry(n)` for `n >= 0`; `tail_sq(n)` bounds `sum_{m >= n} entry(m)^2`
    /// (may be infinite when not square summable).
    Lazy { entry: Entry, tail_sq: Entry },
}

impl fmt::Debug for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(v) => f.debug_tuple("Finite").field(v).finish(),
            Self::Lazy { .. } => f.write_str("Lazy(..)"),
        }
    }
}

impl WeightSequence {
    pub fn finite(entries: Vec<f64>) -> Self {
        Self::Finite(entries)
    }

    pub fn lazy(
        entry: impl Fn(usize) -> f64 + Send + Sync + 'static,
        tail_sq: impl Fn(usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::Lazy { entry: Box::new(entry), tail_sq: Box::new(tail_sq) }
    }

    /// `first * ratio^n`, `n >= 0`.
    pub fn geometric(first: f64, ratio: f64) -> Self {
        Self::lazy(
            move |n| first * libm::pow(ratio, n as f64),
            move |n| {
                if ratio.abs() >= 1.0 {
                    f64::INFINITY
                } else {
                    first * first * libm::pow(ratio, 2.0 * n as f64) / (1.0 - ratio * ratio)
                }
            },
        )
    }

    pub fn scaled(self, c: f64) -> Self {
        match self {
            Self::Finite(v) => Self::Finite(v.into_iter().map(|x| c * x).collect()),
            Self::Lazy { entry, tail_sq } => Self::lazy(move |n| c * entry(n), move |n| c * c * tail_sq(n)),
        }
    }

    /// Materialise enough terms that the dropped tail is negligible at
    /// relative level `tol`.
    pub fn truncate(&self, tol: f64) -> Result<Vec<f64>> {
        let v = match self {
            Self::Finite(v) => v.clone(),
            Self::Lazy { entry, tail_sq } => {
                let mut out = Vec::new();
                let mut max = 0.0f64;
                loop {
                    let n = out.len();
                    let t = tail_sq(n);
                    if !t.is_finite() {
                        return Err(Error::Divergent("weight sequence is not square summable"));
                    }
                    if t == 0.0 || (max > 0.0 && t <= { let b = tol * max / THETA_UNIT_ROOT; b * b }) {
                        break;
                    }
                    if n >= MAX_LAZY_TERMS {
                        return Err(Error::Divergent("tail bound did not decay"));
                    }
                    let x = entry(n);
                    max = max.max(x);
                    out.push(x);
                }
                out
            }
        };
        if v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::Config("weights must be finite and nonnegative"));
        }
        Ok(v)
    }
}

fn theta_sum(v: &[f64], t: f64) -> f64 {
    v.iter().map(|&x| theta(x / t)).sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhoCertificate {
    pub rho: f64,
    /// `sum Theta(sigma / rho)`, at most 1.
    pub sum_at_rho: f64,
    /// `sum Theta(sigma / (rho (1 - tol)))`, above 1 (zero input excepted).
    pub sum_below: f64,
    pub iterations: u32,
    pub terms: usize,
}

pub fn luxemburg_rho(seq: &WeightSequence, tol: f64) -> Result<f64> {
    luxemburg_rho_certified(seq, tol).map(|c| c.rho)
}

pub fn luxemburg_rho_certified(seq: &WeightSequence, tol: f64) -> Result<RhoCertificate> {
    if !(tol > 0.0 && tol < 0.5) {
        return Err(Error::Config("tolerance must lie in (0, 0.5)"));
    }
    let v = seq.truncate(tol)?;
    let max = v.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(RhoCertificate { rho: 0.0, sum_at_rho: 0.0, sum_below: 0.0, iterations: 0, terms: v.len() });
    }
    let l2 = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    // Theta(max/t) <= 1 is necessary, and Theta(x) <= x^2 makes t = |v|_2 sufficient.
    let mut lo = max / THETA_UNIT_ROOT * (1.0 - 1e-12);
    let mut hi = l2.max(max);
    while theta_sum(&v, hi) > 1.0 {
        hi *= 2.0;
    }
    while lo > 0.0 && theta_sum(&v, lo) <= 1.0 {
        lo *= 0.5;
    }
    let mut iterations = 0;
    let mut s_hi = theta_sum(&v, hi);
    while iterations < 400 && (hi - lo > 0.5 * tol * hi || 1.0 - s_hi > tol) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let s = theta_sum(&v, mid);
        if s > 1.0 {
            lo = mid;
        } else {
            hi = mid;
            s_hi = s;
        }
        iterations += 1;
    }
    Ok(RhoCertificate {
        rho: hi,
        sum_at_rho: s_hi,
        sum_below: theta_sum(&v, hi * (1.0 - tol)),
        iterations,
        terms: v.len(),
    })
}

/// `m + 3 sqrt(2) rho(sigmas)`.
pub fn hv_upper_bound(m: f64, sigmas: &WeightSequence) -> Result<f64> {
    if !(m >= 0.0 && m.is_finite()) {
        return Err(Error::Config("m must be finite and nonnegative"));
    }
    Ok(m + 3.0 * core::f64::consts::SQRT_2 * luxemburg_rho(sigmas, DEFAULT_TOL)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn unit_root_oracle() -> f64 {
        let (mut a, mut b) = (1.0f64, 2.0f64);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m * m * (-0.5 / (m * m)).exp() < 1.0 {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn theta_values() {
        assert_eq!(theta(0.0), 0.0);
        assert!((theta(1.0) - (-0.5f64).exp()).abs() < 1e-15);
        let mut prev = theta(0.0);
        for i in 1..=1000 {
            let t = theta(0.05 + i as f64 * 0.005);
            assert!(t > prev);
            prev = t;
        }
    }

    #[test]
    fn unit_root() {
        assert!((THETA_UNIT_ROOT - unit_root_oracle()).abs() < 1e-15);
        assert!((theta(THETA_UNIT_ROOT) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_and_single() {
        assert_eq!(luxemburg_rho(&WeightSequence::finite(vec![0.0; 5]), 1e-10).unwrap(), 0.0);
        assert_eq!(luxemburg_rho(&WeightSequence::finite(vec![]), 1e-10).unwrap(), 0.0);
        for a in [0.1, 1.0, 7.5] {
            let r = luxemburg_rho(&WeightSequence::finite(vec![a]), 1e-10).unwrap();
            assert!((r - a / THETA_UNIT_ROOT).abs() <= 2e-10 * r);
        }
    }

    #[test]
    fn certificate_holds() {
        let tol = 1e-10;
        for seq in [
            WeightSequence::finite(vec![1.0, 0.5, 0.25, 3.0]),
            WeightSequence::geometric(0.5, 0.5),
            WeightSequence::finite((0..=10).map(|j| 2f64.powf(-j as f64 / 2.0)).collect()),
        ] {
            let c = luxemburg_rho_certified(&seq, tol).unwrap();
            assert!(c.sum_at_rho <= 1.0);
            assert!(1.0 - c.sum_at_rho <= tol);
            assert!(c.sum_below > 1.0);
        }
    }

    #[test]
    fn halving_sequence() {
        let r = luxemburg_rho(&WeightSequence::geometric(0.5, 0.5), 1e-10).unwrap();
        let ratio = r / 2f64.ln().sqrt();
        assert!((0.25..=4.0).contains(&ratio), "{r}");
        assert!((r - 0.43167).abs() < 1e-3, "{r}");
    }

    #[test]
    fn geometric_three_quarters() {
        let r = luxemburg_rho(&WeightSequence::geometric(0.75, 0.75), 1e-10).unwrap();
        let ratio = r / 4f64.ln().sqrt();
        assert!((0.25..=4.0).contains(&ratio), "{r}");
    }

    #[test]
    fn divergent() {
        assert!(matches!(
            luxemburg_rho(&WeightSequence::geometric(1.0, 1.0), 1e-10),
            Err(Error::Divergent(_))
        ));
        let harmonicish = WeightSequence::lazy(|n| 1.0 / libm::sqrt(n as f64 + 1.0), |_| f64::INFINITY);
        assert!(luxemburg_rho(&harmonicish, 1e-10).is_err());
    }

    #[test]
    fn bad_entries() {
        assert!(luxemburg_rho(&WeightSequence::finite(vec![1.0, -1.0]), 1e-10).is_err());
        assert!(luxemburg_rho(&WeightSequence::finite(vec![f64::NAN]), 1e-10).is_err());
        assert!(luxemburg_rho(&WeightSequence::finite(vec![1.0]), 0.0).is_err());
    }

    #[test]
    fn hv_examples() {
        assert_eq!(hv_upper_bound(0.0, &WeightSequence::finite(vec![0.0])).unwrap(), 0.0);
        let b = hv_upper_bound(1.0, &WeightSequence::finite(vec![1.0])).unwrap();
        assert!((b - (1.0 + 3.0 * 2f64.sqrt() / THETA_UNIT_ROOT)).abs() < 1e-9);
        assert!(hv_upper_bound(-1.0, &WeightSequence::finite(vec![1.0])).is_err());
    }

    #[test]
    fn lazy_matches_finite() {
        let tol = 1e-10;
        let lazy = luxemburg_rho(&WeightSequence::geometric(1.0, 0.3), tol).unwrap();
        let fin = luxemburg_rho(&WeightSequence::finite((0..60).map(|n| 0.3f64.powi(n)).collect()), tol).unwrap();
        assert!((lazy - fin).abs() <= 4.0 * tol * fin);
    }
}
