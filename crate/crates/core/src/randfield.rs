//! Truncated spectral fields and Gaussian white noise.
//!
//! A [`SpectralField`] stores `f^(k)` for `|k| <= N` densely on the cube
//! `[-N, N]^d` (row-major, first component slowest, so storage order is the
//! lexicographic order of the lattice). Entries outside the ball are kept at
//! zero and reads outside the ball return zero.
//!
//! White noise is `W = sum_k gamma_k e_k` with i.i.d. complex standard
//! Gaussians; the pairing with a test function is `<f, W> = sum_k gamma_k f^(-k)`.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{Dim, FreqIndex, MAX_DIM};
use crate::rng::{complex_gaussian_from_block, StreamKey};

/// Default ceiling on stored coefficients (`(2N+1)^d`).
pub const DEFAULT_COEFFICIENT_BUDGET: usize = 1 << 24;

const NOISE_DOMAIN: u64 = 0x5748_4954_454e_4f49;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RngSpec {
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Provenance {
    Deterministic,
    WhiteNoise { seed: u64, trial: u64, real: bool },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NoiseOptions {
    /// Hermitian-symmetrised (real-valued) variant, `gamma_{-k} = conj(gamma_k)`.
    pub real: bool,
    pub budget: usize,
}

impl Default for NoiseOptions {
    fn default() -> Self {
        NoiseOptions {
            real: false,
            budget: DEFAULT_COEFFICIENT_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    dim: Dim,
    cutoff: u32,
    side: usize,
    coeffs: Vec<Complex64>,
    provenance: Provenance,
}

fn cube_len(dim: Dim, cutoff: u32, budget: usize) -> Result<usize> {
    let side = 2 * cutoff as usize + 1;
    let mut n: usize = 1;
    for _ in 0..dim.get() {
        n = n.checked_mul(side).ok_or(Error::Budget {
            needed: usize::MAX,
            budget,
        })?;
    }
    if n > budget {
        return Err(Error::Budget { needed: n, budget });
    }
    Ok(n)
}

impl SpectralField {
    pub fn zeros(dim: Dim, cutoff: u32) -> Result<Self> {
        Self::zeros_with_budget(dim, cutoff, DEFAULT_COEFFICIENT_BUDGET)
    }

    pub fn zeros_with_budget(dim: Dim, cutoff: u32, budget: usize) -> Result<Self> {
        let len = cube_len(dim, cutoff, budget)?;
        Ok(SpectralField {
            dim,
            cutoff,
            side: 2 * cutoff as usize + 1,
            coeffs: vec![Complex64::new(0.0, 0.0); len],
            provenance: Provenance::Deterministic,
        })
    }

    /// A field with a single nonzero coefficient.
    pub fn single_mode(k: FreqIndex, value: Complex64, cutoff: u32) -> Result<Self> {
        let mut f = Self::zeros(k.dim(), cutoff)?;
        f.set(&k, value)?;
        Ok(f)
    }

    #[inline]
    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// Cutoff radius `N`.
    #[inline]
    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    fn offset(&self, k: &FreqIndex) -> Option<usize> {
        if k.dim() != self.dim {
            return None;
        }
        let n = self.cutoff as i64;
        if k.norm_sq() > (n * n) as u64 {
            return None;
        }
        let mut off = 0usize;
        for &c in k.components() {
            off = off * self.side + (c + n) as usize;
        }
        Some(off)
    }

    fn index_at(&self, mut offset: usize) -> FreqIndex {
        let d = self.dim.get();
        let n = self.cutoff as i64;
        let mut k = [0i64; MAX_DIM];
        for axis in (0..d).rev() {
            k[axis] = (offset % self.side) as i64 - n;
            offset /= self.side;
        }
        FreqIndex::new(&k[..d]).expect("dimension already validated")
    }

    /// `f^(k)`, zero outside the stored ball.
    pub fn get(&self, k: &FreqIndex) -> Complex64 {
        self.offset(k)
            .map(|o| self.coeffs[o])
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn set(&mut self, k: &FreqIndex, value: Complex64) -> Result<()> {
        if k.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim.get(),
                got: k.dim().get(),
            });
        }
        let o = self.offset(k).ok_or(Error::OutOfBall)?;
        self.coeffs[o] = value;
        Ok(())
    }

    /// Stored coefficients `(k, f^(k))` with `|k| <= N`, lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (FreqIndex, Complex64)> + '_ {
        let r2 = (self.cutoff as u64) * (self.cutoff as u64);
        (0..self.coeffs.len()).filter_map(move |o| {
            let k = self.index_at(o);
            (k.norm_sq() <= r2).then(|| (k, self.coeffs[o]))
        })
    }

    /// Like [`iter`](Self::iter) but yields `|k|^2` instead of `k`; cheaper in
    /// tight spectral sums.
    pub fn iter_norm_sq(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        let d = self.dim.get();
        let n = self.cutoff as i64;
        let side = self.side;
        let r2 = (n * n) as u64;
        self.coeffs.iter().enumerate().filter_map(move |(o, &c)| {
            let mut rest = o;
            let mut sq = 0u64;
            for _ in 0..d {
                let comp = (rest % side) as i64 - n;
                rest /= side;
                sq += (comp * comp) as u64;
            }
            (sq <= r2).then_some((sq, c))
        })
    }

    /// Largest `|k|` carrying a nonzero coefficient (0 for the zero field).
    pub fn band_limit(&self) -> f64 {
        let m = self
            .iter_norm_sq()
            .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
            .map(|(n, _)| n)
            .max()
            .unwrap_or(0);
        libm::sqrt(m as f64)
    }

    /// `sum_k |f^(k)|^2`.
    pub fn l2_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Pairing `<f, W> = sum_k f^(k) g^(-k)` with a test function given by its
    /// Fourier coefficients `g`.
    pub fn pair(&self, test: &SpectralField) -> Complex64 {
        self.iter()
            .map(|(k, c)| c * test.get(&k.neg()))
            .fold(Complex64::new(0.0, 0.0), |a, b| a + b)
    }

    /// Copy restricted to a smaller cutoff (nested truncation).
    pub fn truncated(&self, cutoff: u32) -> Result<Self> {
        if cutoff > self.cutoff {
            return Err(Error::Config("truncation cutoff exceeds field cutoff"));
        }
        let mut out = Self::zeros(self.dim, cutoff)?;
        for (k, c) in self.iter() {
            if k.norm_sq() <= (cutoff as u64) * (cutoff as u64) {
                out.set(&k, c)?;
            }
        }
        out.provenance = self.provenance;
        Ok(out)
    }

    pub fn map(&mut self, mut f: impl FnMut(Complex64) -> Complex64) {
        self.coeffs.iter_mut().for_each(|c| *c = f(*c));
    }
}

/// The coefficient `gamma_k` of trial `trial` under `rng`. Independent of the
/// cutoff, so nested truncations of one trial share coefficients.
pub fn noise_coefficient(rng: RngSpec, trial: u64, k: &FreqIndex) -> Complex64 {
    let key = StreamKey::new(rng.seed, trial, NOISE_DOMAIN ^ k.dim().get() as u64);
    complex_gaussian_from_block(key.block(counter_for(k)))
}

fn counter_for(k: &FreqIndex) -> [u32; 4] {
    let mut ctr = [0u32; 4];
    for (slot, &c) in ctr.iter_mut().zip(k.components()) {
        *slot = c as i32 as u32;
    }
    ctr
}

/// Draws one complex standard Gaussian at stream position `position`.
pub fn sample_standard_complex(rng: RngSpec, trial: u64, position: u64) -> Complex64 {
    let key = StreamKey::new(rng.seed, trial, !NOISE_DOMAIN);
    complex_gaussian_from_block(key.block([position as u32, (position >> 32) as u32, 0, 0]))
}

/// Truncated white noise `sum_{|k| <= N} gamma_k e_k`.
pub fn sample_white_noise(dim: Dim, cutoff: u32, rng: RngSpec, trial: u64, opts: NoiseOptions) -> Result<SpectralField> {
    if cutoff == 0 {
        return Err(Error::Config("white noise cutoff must be >= 1"));
    }
    let mut field = SpectralField::zeros_with_budget(dim, cutoff, opts.budget)?;
    let key = StreamKey::new(rng.seed, trial, NOISE_DOMAIN ^ dim.get() as u64);
    let r2 = (cutoff as u64) * (cutoff as u64);
    for o in 0..field.coeffs.len() {
        let k = field.index_at(o);
        if k.norm_sq() > r2 {
            continue;
        }
        field.coeffs[o] = if !opts.real {
            complex_gaussian_from_block(key.block(counter_for(&k)))
        } else if k.norm_sq() == 0 {
            let g = complex_gaussian_from_block(key.block(counter_for(&k)));
            Complex64::new(core::f64::consts::SQRT_2 * g.re, 0.0)
        } else if k.is_positive() {
            complex_gaussian_from_block(key.block(counter_for(&k)))
        } else {
            complex_gaussian_from_block(key.block(counter_for(&k.neg()))).conj()
        };
    }
    field.provenance = Provenance::WhiteNoise {
        seed: rng.seed,
        trial,
        real: opts.real,
    };
    Ok(field)
}

/// `||gamma_1||_{L^p(Omega)} = Gamma(p/2 + 1)^(1/p)`.
pub fn gamma_moment(p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Config("moment order must be finite and >= 1"));
    }
    Ok(libm::pow(libm::tgamma(p / 2.0 + 1.0), 1.0 / p))
}

/// `max_{1 <= |k| <= n} |gamma_k| / sqrt(log(|k|^d + 1))`, with `n` defaulting
/// to the field cutoff.
pub fn log_sup_statistic(field: &SpectralField) -> f64 {
    log_sup_statistic_upto(field, field.cutoff())
}

pub fn log_sup_statistic_upto(field: &SpectralField, n: u32) -> f64 {
    let d = field.dim().get() as f64;
    let n2 = (n as u64) * (n as u64);
    field
        .iter_norm_sq()
        .filter(|&(sq, _)| sq >= 1 && sq <= n2)
        .map(|(sq, c)| {
            let r = libm::sqrt(sq as f64);
            c.norm() / libm::sqrt(libm::log(libm::pow(r, d) + 1.0))
        })
        .fold(0.0, f64::max)
}

/// `max_{|k| <= n} |f^(k)|`.
pub fn sup_modulus_upto(field: &SpectralField, n: u32) -> f64 {
    let n2 = (n as u64) * (n as u64);
    field
        .iter_norm_sq()
        .filter(|&(sq, _)| sq <= n2)
        .map(|(_, c)| c.norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec::Vec;

    fn d(n: usize) -> Dim {
        Dim::new(n).unwrap()
    }

    #[test]
    fn storage_roundtrip_and_bounds() {
        let mut f = SpectralField::zeros(d(2), 3).unwrap();
        let k = FreqIndex::new(&[1, -2]).unwrap();
        f.set(&k, Complex64::new(1.0, 2.0)).unwrap();
        assert_eq!(f.get(&k), Complex64::new(1.0, 2.0));
        let corner = FreqIndex::new(&[3, 3]).unwrap();
        assert_eq!(f.get(&corner), Complex64::new(0.0, 0.0));
        assert_eq!(f.set(&corner, Complex64::new(1.0, 0.0)), Err(Error::OutOfBall));
        assert!(f.set(&FreqIndex::new(&[1]).unwrap(), Complex64::new(1.0, 0.0)).is_err());
        let ks: Vec<FreqIndex> = f.iter().map(|(k, _)| k).collect();
        assert_eq!(ks, crate::lattice::enumerate_ball(2, 3.0).unwrap());
        let sq: Vec<u64> = f.iter_norm_sq().map(|(n, _)| n).collect();
        assert_eq!(sq, ks.iter().map(|k| k.norm_sq()).collect::<Vec<_>>());
    }

    #[test]
    fn budget_guard() {
        let err = SpectralField::zeros_with_budget(d(3), 50, 1000).unwrap_err();
        assert!(matches!(err, Error::Budget { .. }));
        let opts = NoiseOptions { real: false, budget: 10 };
        assert!(sample_white_noise(d(1), 8, RngSpec { seed: 0 }, 0, opts).is_err());
    }

    #[test]
    fn noise_is_deterministic_and_nested() {
        let rng = RngSpec { seed: 11 };
        let a = sample_white_noise(d(1), 3, rng, 5, NoiseOptions::default()).unwrap();
        let b = sample_white_noise(d(1), 3, rng, 5, NoiseOptions::default()).unwrap();
        assert_eq!(a, b);
        let big = sample_white_noise(d(1), 40, rng, 5, NoiseOptions::default()).unwrap();
        for (k, c) in a.iter() {
            assert_eq!(big.get(&k).re.to_bits(), c.re.to_bits());
            assert_eq!(noise_coefficient(rng, 5, &k), c);
        }
        let other = sample_white_noise(d(1), 3, rng, 6, NoiseOptions::default()).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn real_noise_is_hermitian() {
        let opts = NoiseOptions { real: true, ..Default::default() };
        let f = sample_white_noise(d(2), 5, RngSpec { seed: 2 }, 0, opts).unwrap();
        for (k, c) in f.iter() {
            assert_eq!(f.get(&k.neg()), c.conj());
        }
        assert_eq!(f.get(&FreqIndex::zero(d(2))).im, 0.0);
    }

    #[test]
    fn gamma_moments() {
        assert!((gamma_moment(2.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((gamma_moment(4.0).unwrap() - 2f64.powf(0.25)).abs() < 1e-14);
        assert!((gamma_moment(1.0).unwrap() - core::f64::consts::PI.sqrt() / 2.0).abs() < 1e-14);
        assert!(gamma_moment(0.5).is_err());
    }

    #[test]
    fn log_sup_nondecreasing_and_zero() {
        let f = sample_white_noise(d(1), 256, RngSpec { seed: 3 }, 0, NoiseOptions::default()).unwrap();
        let vals: Vec<f64> = [2, 4, 8, 16, 64, 256].iter().map(|&n| log_sup_statistic_upto(&f, n)).collect();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(log_sup_statistic(&SpectralField::zeros(d(1), 8).unwrap()), 0.0);
    }

    #[test]
    fn pairing_convention() {
        // <e_1, W> picks gamma_{-1} since e_1^(k) = delta_{k,1}
        let f = sample_white_noise(d(1), 4, RngSpec { seed: 9 }, 0, NoiseOptions::default()).unwrap();
        let e1 = SpectralField::single_mode(FreqIndex::new(&[1]).unwrap(), Complex64::new(1.0, 0.0), 4).unwrap();
        assert_eq!(f.pair(&e1), f.get(&FreqIndex::new(&[-1]).unwrap()));
    }
}
