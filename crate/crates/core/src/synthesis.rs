//! Littlewood-Paley blocks on uniform torus grids and their `L^p` norms.
//!
//! Grid points are `x_m = -pi + 2 pi m / M` per axis. The torus carries
//! Lebesgue measure with total mass `(2 pi)^d`, and that factor is kept
//! explicitly in every norm.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::lattice::{Dim, FreqIndex};
use crate::partition::PartitionProfile;
use crate::randfield::SpectralField;

const TAU: f64 = core::f64::consts::TAU;

/// Samples of a band-limited function on the `M^d` grid, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    dim: Dim,
    samples_per_axis: usize,
    samples: Vec<Complex64>,
    band_limit: f64,
}

impl GridField {
    pub fn new(dim: Dim, samples_per_axis: usize, samples: Vec<Complex64>, band_limit: f64) -> Result<Self> {
        if samples_per_axis == 0 {
            return Err(Error::Config("grid needs at least one sample per axis"));
        }
        if Some(samples.len()) != samples_per_axis.checked_pow(dim.get() as u32) {
            return Err(Error::Config("sample array must have exactly M^d entries"));
        }
        Ok(GridField {
            dim,
            samples_per_axis,
            samples,
            band_limit,
        })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn samples_per_axis(&self) -> usize {
        self.samples_per_axis
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn band_limit(&self) -> f64 {
        self.band_limit
    }

    /// Coordinates of grid point `m`.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        grid_point(self.dim.get(), self.samples_per_axis, flat)
    }

    pub fn scale(&mut self, c: Complex64) {
        self.samples.iter_mut().for_each(|v| *v *= c);
    }
}

/// An `L^p` norm evaluated by grid quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridNorm {
    pub value: f64,
    /// Set for `p = inf`, where the grid maximum only bounds the sup from below.
    pub approximate: bool,
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::Config("integrability exponent p must lie in [1, inf]"))
    }
}

/// `((2 pi / M)^d sum_m |g(x_m)|^p)^(1/p)`, or `max_m |g(x_m)|` for `p = inf`.
pub fn lp_norm_grid(g: &GridField, p: f64) -> Result<GridNorm> {
    check_exponent(p)?;
    if p.is_infinite() {
        let value = g.samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
        return Ok(GridNorm { value, approximate: true });
    }
    let d = g.dim.get() as i32;
    let cell = libm::pow(TAU / g.samples_per_axis as f64, d as f64);
    let sum: f64 = if p == 2.0 {
        g.samples.iter().map(|v| v.norm_sqr()).sum()
    } else {
        g.samples.iter().map(|v| libm::pow(v.norm(), p)).sum()
    };
    Ok(GridNorm {
        value: libm::pow(cell * sum, 1.0 / p),
        approximate: false,
    })
}

/// Synthesises `sum_k w(k) f^(k) e^{ik.x}` on the `M^d` grid, where `w` is
/// given on `|k|^2`.
pub fn synthesize_weighted(field: &SpectralField, m: usize, band: f64, weight: impl Fn(u64) -> f64) -> Result<GridField> {
    if m == 0 || !(m as f64 > 2.0 * band) {
        return Err(Error::Nyquist {
            samples: m,
            band,
            required: 2.0 * band,
        });
    }
    let dim = field.dim();
    let d = dim.get();
    let len = m.checked_pow(d as u32).ok_or(Error::Config("grid too large"))?;
    let mut data = vec![Complex64::new(0.0, 0.0); len];
    for (k, c) in field.iter() {
        let w = weight(k.norm_sq());
        if w == 0.0 || (c.re == 0.0 && c.im == 0.0) {
            continue;
        }
        let mut off = 0usize;
        let mut parity = 0i64;
        for &comp in k.components() {
            off = off * m + comp.rem_euclid(m as i64) as usize;
            parity += comp;
        }
        // e^{ik(-pi)} = (-1)^k shifts the grid origin to -pi
        let sign = if parity.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        data[off] += c * (w * sign);
    }
    fft::transform(&mut data, d, m);
    GridField::new(dim, m, data, band)
}

/// Band radius that a block can occupy: `min(2^(j+1), N)`.
pub fn block_band(field: &SpectralField, j: u32) -> f64 {
    libm::fmin(libm::exp2(j as f64 + 1.0), field.cutoff() as f64)
}

/// The block `f_j(x) = sum_k phi_j(k) f^(k) e^{ik.x}` on an `M^d` grid.
pub fn synthesize_block(field: &SpectralField, profile: &PartitionProfile, j: u32, m: usize) -> Result<GridField> {
    synthesize_weighted(field, m, block_band(field, j), |n| profile.phi_j_sq(j, n))
}

fn grid_point(d: usize, m: usize, mut flat: usize) -> Vec<f64> {
    let mut x = vec![0.0; d];
    for axis in (0..d).rev() {
        x[axis] = -core::f64::consts::PI + TAU * (flat % m) as f64 / m as f64;
        flat /= m;
    }
    x
}

/// Same samples as [`synthesize_block`] by plain summation, `O(#k * M^d)`.
/// Only meant for small sizes.
pub fn synthesize_block_direct(field: &SpectralField, profile: &PartitionProfile, j: u32, m: usize) -> Result<GridField> {
    let band = block_band(field, j);
    if m == 0 || !(m as f64 > 2.0 * band) {
        return Err(Error::Nyquist {
            samples: m,
            band,
            required: 2.0 * band,
        });
    }
    let dim = field.dim();
    let len = m.checked_pow(dim.get() as u32).ok_or(Error::Config("grid too large"))?;
    let terms: Vec<(FreqIndex, Complex64)> = field
        .iter()
        .map(|(k, c)| {
            let w = profile.phi_j_sq(j, k.norm_sq());
            (k, c * w)
        })
        .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
        .collect();
    let mut data = vec![Complex64::new(0.0, 0.0); len];
    for (flat, slot) in data.iter_mut().enumerate() {
        let x = grid_point(dim.get(), m, flat);
        for (k, c) in &terms {
            let phase: f64 = k.components().iter().zip(&x).map(|(&a, &b)| a as f64 * b).sum();
            *slot += c * Complex64::new(libm::cos(phase), libm::sin(phase));
        }
    }
    GridField::new(dim, m, data, band)
}

/// Exact `||f_j||_{L^2} = (2 pi)^{d/2} (sum_k |phi_j(k) f^(k)|^2)^{1/2}`.
pub fn l2_norm_parseval(field: &SpectralField, profile: &PartitionProfile, j: u32) -> f64 {
    let s: f64 = field
        .iter_norm_sq()
        .map(|(n, c)| {
            let w = profile.phi_j_sq(j, n);
            w * w * c.norm_sqr()
        })
        .sum();
    libm::pow(TAU, field.dim().get() as f64 / 2.0) * libm::sqrt(s)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureOptions {
    /// Oversampling factor: the first grid has `osf * min(2^(j+1), N)` points
    /// per axis, rounded up to a power of two.
    pub osf: usize,
    pub tol: f64,
    pub max_refinements: u32,
    /// Refinement also stops once a grid would exceed this many points.
    pub max_grid_points: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            osf: 4,
            tol: 1e-6,
            max_refinements: 12,
            max_grid_points: 1 << 24,
        }
    }
}

/// A block norm together with how it was obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlockNorm {
    pub value: f64,
    pub approximate: bool,
    /// Final grid size per axis; `None` when computed spectrally.
    pub grid: Option<usize>,
}

/// `||f_j||_{L^p}`: Parseval for `p = 2`, otherwise grid quadrature refined
/// until two successive grids agree to `opts.tol` (relative). Even integer
/// `p` is exact once `M > p * band` and is not refined further.
pub fn block_lp_norm(field: &SpectralField, profile: &PartitionProfile, j: u32, p: f64, opts: &QuadratureOptions) -> Result<BlockNorm> {
    check_exponent(p)?;
    if p == 2.0 {
        return Ok(BlockNorm {
            value: l2_norm_parseval(field, profile, j),
            approximate: false,
            grid: None,
        });
    }
    if opts.osf < 3 {
        return Err(Error::Config("oversampling factor must be >= 3"));
    }
    let band = block_band(field, j);
    let m0 = ((opts.osf as f64 * band) as usize).max(1).next_power_of_two();
    let norm_at = |m: usize| -> Result<GridNorm> { lp_norm_grid(&synthesize_block(field, profile, j, m)?, p) };
    let first = norm_at(m0)?;
    if p.is_infinite() {
        let second = norm_at(2 * m0)?;
        return Ok(BlockNorm {
            value: first.value.max(second.value),
            approximate: true,
            grid: Some(2 * m0),
        });
    }
    let even_int = p == libm::floor(p) && (p as u64) % 2 == 0;
    if even_int && m0 as f64 > p * band {
        return Ok(BlockNorm {
            value: first.value,
            approximate: false,
            grid: Some(m0),
        });
    }
    let mut prev = first.value;
    let mut m = m0;
    let mut change = f64::INFINITY;
    let d = field.dim().get() as u32;
    for _ in 0..=opts.max_refinements {
        m *= 2;
        if libm::pow(m as f64, d as f64) > opts.max_grid_points as f64 {
            break;
        }
        let next = norm_at(m)?.value;
        change = if next == 0.0 && prev == 0.0 {
            0.0
        } else {
            (next - prev).abs() / next.abs().max(prev.abs())
        };
        if change <= opts.tol {
            return Ok(BlockNorm {
                value: next,
                approximate: false,
                grid: Some(m),
            });
        }
        prev = next;
    }
    Err(Error::Quadrature {
        level: j,
        change,
        tol: opts.tol,
        refinements: opts.max_refinements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randfield::{sample_white_noise, NoiseOptions, RngSpec};

    fn dim(d: usize) -> Dim {
        Dim::new(d).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn constant_block() {
        let v = Complex64::new(0.3, -1.2);
        let f = SpectralField::single_mode(FreqIndex::zero(dim(2)), v, 4).unwrap();
        let g = synthesize_block(&f, &PartitionProfile::sharp(), 0, 16).unwrap();
        assert!(g.samples().iter().all(|s| (s - v).norm() < 1e-14));
        for p in [1.0, 2.0, 3.5] {
            let n = lp_norm_grid(&g, p).unwrap();
            let want = v.norm() * std::f64::consts::TAU.powf(2.0 / p);
            assert!((n.value - want).abs() < 1e-12 * want);
            assert!(!n.approximate);
        }
        let inf = lp_norm_grid(&g, f64::INFINITY).unwrap();
        assert!((inf.value - v.norm()).abs() < 1e-14 && inf.approximate);
    }

    #[test]
    fn off_support_block_is_zero() {
        let f = SpectralField::single_mode(FreqIndex::new(&[5]).unwrap(), c(1.0), 8).unwrap();
        let g = synthesize_block(&f, &PartitionProfile::sharp(), 1, 64).unwrap();
        assert!(g.samples().iter().all(|s| s.norm() == 0.0));
    }

    #[test]
    fn single_mode_norms_and_values() {
        let k = FreqIndex::new(&[3, -1]).unwrap();
        let f = SpectralField::single_mode(k, c(1.0), 4).unwrap();
        let g = synthesize_weighted(&f, 16, 4.0, |_| 1.0).unwrap();
        for (i, s) in g.samples().iter().enumerate() {
            let x = g.point(i);
            let want = Complex64::from_polar(1.0, 3.0 * x[0] - x[1]);
            assert!((s - want).norm() < 1e-12);
        }
        for p in [1.0, 2.0, 4.0, 7.0] {
            let n = lp_norm_grid(&g, p).unwrap().value;
            assert!((n - std::f64::consts::TAU.powf(2.0 / p)).abs() < 1e-12 * n);
        }
    }

    #[test]
    fn nyquist_is_enforced() {
        let f = sample_white_noise(dim(1), 8, RngSpec { seed: 1 }, 0, NoiseOptions::default()).unwrap();
        assert!(matches!(
            synthesize_block(&f, &PartitionProfile::sharp(), 3, 16),
            Err(Error::Nyquist { .. })
        ));
        assert!(synthesize_block(&f, &PartitionProfile::sharp(), 3, 17).is_ok());
        assert!(lp_norm_grid(&synthesize_block(&f, &PartitionProfile::sharp(), 3, 32).unwrap(), 0.5).is_err());
    }

    #[test]
    fn parseval_examples() {
        let tau = std::f64::consts::TAU;
        let e0 = SpectralField::single_mode(FreqIndex::zero(dim(3)), c(1.0), 2).unwrap();
        assert!((l2_norm_parseval(&e0, &PartitionProfile::sharp(), 0) - tau.powf(1.5)).abs() < 1e-12);
        let mut f = SpectralField::zeros(dim(1), 4).unwrap();
        f.set(&FreqIndex::new(&[2]).unwrap(), c(1.0)).unwrap();
        f.set(&FreqIndex::new(&[-2]).unwrap(), c(1.0)).unwrap();
        let v = l2_norm_parseval(&f, &PartitionProfile::sharp(), 1);
        assert!((v - tau.sqrt() * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn quadrature_even_p_is_stable() {
        let f = sample_white_noise(dim(1), 32, RngSpec { seed: 4 }, 0, NoiseOptions::default()).unwrap();
        let prof = PartitionProfile::sharp();
        for j in 0..5 {
            let band = block_band(&f, j);
            let m = (4.0 * band) as usize * 2;
            let a = lp_norm_grid(&synthesize_block(&f, &prof, j, m).unwrap(), 4.0).unwrap().value;
            let b = lp_norm_grid(&synthesize_block(&f, &prof, j, 2 * m).unwrap(), 4.0).unwrap().value;
            assert!((a - b).abs() <= 1e-12 * a, "j={j}");
        }
    }

    #[test]
    fn block_norms_converge() {
        let f = sample_white_noise(dim(2), 16, RngSpec { seed: 5 }, 0, NoiseOptions::default()).unwrap();
        let opts = QuadratureOptions::default();
        for prof in [PartitionProfile::sharp(), PartitionProfile::smooth()] {
            for p in [1.0, 3.0, 4.0, f64::INFINITY] {
                for j in 0..4 {
                    let n = block_lp_norm(&f, &prof, j, p, &opts).unwrap();
                    assert!(n.value.is_finite() && n.value > 0.0);
                    assert_eq!(n.approximate, p.is_infinite());
                }
            }
        }
        let strict = QuadratureOptions { tol: 0.0, max_refinements: 1, ..opts };
        assert!(matches!(
            block_lp_norm(&f, &PartitionProfile::sharp(), 2, 1.0, &strict),
            Err(Error::Quadrature { .. })
        ));
    }

    #[test]
    fn direct_matches_fast_in_two_dims() {
        let f = sample_white_noise(dim(2), 5, RngSpec { seed: 4 }, 0, NoiseOptions::default()).unwrap();
        for j in 0..4 {
            for profile in [PartitionProfile::sharp(), PartitionProfile::smooth()] {
                let a = synthesize_block(&f, &profile, j, 16).unwrap();
                let b = synthesize_block_direct(&f, &profile, j, 16).unwrap();
                let err = a.samples().iter().zip(b.samples()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
                assert!(err < 1e-12, "j={j} err={err}");
            }
        }
        assert!(synthesize_block_direct(&f, &PartitionProfile::sharp(), 3, 10).is_err());
    }

    #[test]
    fn scaling_is_linear() {
        let f = sample_white_noise(dim(1), 16, RngSpec { seed: 6 }, 0, NoiseOptions::default()).unwrap();
        let g = synthesize_block(&f, &PartitionProfile::smooth(), 2, 64).unwrap();
        let mut h = g.clone();
        let s = Complex64::new(-1.5, 2.0);
        h.scale(s);
        for p in [1.0, 2.5, f64::INFINITY] {
            let a = lp_norm_grid(&g, p).unwrap().value;
            let b = lp_norm_grid(&h, p).unwrap().value;
            assert!((b - s.norm() * a).abs() < 1e-12 * b);
        }
    }
}
