//! The integer frequency lattice, Euclidean balls and dyadic shells.
//!
//! Shell membership is always decided on the squared norm `|k|^2` with
//! integer arithmetic, because `|k|^2 = 2^(2j+1)` is attainable on the
//! lattice and a floating comparison would misplace those points.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Largest supported lattice dimension.
pub const MAX_DIM: usize = 4;

/// Lattice dimension `d`, validated to `1..=MAX_DIM`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "usize", into = "usize"))]
pub struct Dim(u8);

impl Dim {
    pub fn new(d: usize) -> Result<Self> {
        if (1..=MAX_DIM).contains(&d) {
            Ok(Dim(d as u8))
        } else {
            Err(Error::Dimension(d))
        }
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0 as usize
    }
}

impl TryFrom<usize> for Dim {
    type Error = Error;
    fn try_from(d: usize) -> Result<Self> {
        Dim::new(d)
    }
}

impl From<Dim> for usize {
    fn from(d: Dim) -> usize {
        d.get()
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A frequency vector `k` in `Z^d`. Unused trailing components are zero, so
/// the derived ordering is lexicographic within one dimension.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreqIndex {
    dim: Dim,
    k: [i64; MAX_DIM],
}

impl FreqIndex {
    pub fn new(components: &[i64]) -> Result<Self> {
        let dim = Dim::new(components.len())?;
        let mut k = [0; MAX_DIM];
        k[..components.len()].copy_from_slice(components);
        Ok(FreqIndex { dim, k })
    }

    pub fn zero(dim: Dim) -> Self {
        FreqIndex { dim, k: [0; MAX_DIM] }
    }

    #[inline]
    pub fn dim(&self) -> Dim {
        self.dim
    }

    #[inline]
    pub fn components(&self) -> &[i64] {
        &self.k[..self.dim.get()]
    }

    /// `|k|^2`, exact.
    #[inline]
    pub fn norm_sq(&self) -> u64 {
        self.components().iter().map(|&c| (c * c) as u64).sum()
    }

    /// Euclidean norm `|k|`.
    #[inline]
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sq() as f64)
    }

    pub fn neg(&self) -> Self {
        let mut k = self.k;
        k.iter_mut().for_each(|c| *c = -*c);
        FreqIndex { dim: self.dim, k }
    }

    /// True if the first nonzero component is positive (one representative
    /// of each `{k, -k}` pair with `k != 0`).
    pub fn is_positive(&self) -> bool {
        self.components()
            .iter()
            .find(|&&c| c != 0)
            .is_some_and(|&c| c > 0)
    }
}

impl fmt::Debug for FreqIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.components()).finish()
    }
}

/// Which dyadic shell family a level belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ShellKind {
    /// `2^(j-1/2) < |k| <= 2^(j+1/2)`; pairwise disjoint in `j`.
    Narrow,
    /// `2^(j-1) <= |k| <= 2^(j+1)`; each point lies in up to three shells.
    Wide,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ShellSpec {
    pub level: u32,
    pub kind: ShellKind,
}

impl ShellSpec {
    pub fn new(level: u32, kind: ShellKind) -> Result<Self> {
        if level == 0 {
            return Err(Error::Config("shell level must be >= 1"));
        }
        if level > 30 {
            return Err(Error::Config("shell level must be <= 30"));
        }
        Ok(ShellSpec { level, kind })
    }

    pub fn narrow(level: u32) -> Result<Self> {
        Self::new(level, ShellKind::Narrow)
    }

    pub fn wide(level: u32) -> Result<Self> {
        Self::new(level, ShellKind::Wide)
    }

    /// Exact membership test on `|k|^2`.
    #[inline]
    pub fn contains_sq(&self, norm_sq: u64) -> bool {
        let j = self.level;
        match self.kind {
            ShellKind::Narrow => norm_sq > 1u64 << (2 * j - 1) && norm_sq <= 1u64 << (2 * j + 1),
            ShellKind::Wide => norm_sq >= 1u64 << (2 * j - 2) && norm_sq <= 1u64 << (2 * j + 2),
        }
    }

    /// `|k|^2` bound of the outer sphere.
    pub fn outer_radius_sq(&self) -> u64 {
        match self.kind {
            ShellKind::Narrow => 1u64 << (2 * self.level + 1),
            ShellKind::Wide => 1u64 << (2 * self.level + 2),
        }
    }
}

/// Largest integer `r` with `r^2 <= n`.
pub fn isqrt(n: u64) -> u64 {
    let mut r = libm::sqrt(n as f64) as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Calls `visit` for every `k` with `|k|^2 <= radius_sq`, in lexicographic
/// order.
pub fn for_each_in_ball(dim: Dim, radius_sq: u64, mut visit: impl FnMut(FreqIndex)) {
    let d = dim.get();
    let r = isqrt(radius_sq) as i64;
    let mut k = [0i64; MAX_DIM];
    k[..d].iter_mut().for_each(|c| *c = -r);
    loop {
        let idx = FreqIndex { dim, k };
        if idx.norm_sq() <= radius_sq {
            visit(idx);
        }
        // odometer increment, last component fastest
        let mut axis = d;
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            if k[axis] < r {
                k[axis] += 1;
                break;
            }
            k[axis] = -r;
        }
    }
}

/// All `k` in `Z^d` with `|k|^2 <= radius_sq`, lexicographically ordered.
pub fn enumerate_ball_sq(dim: Dim, radius_sq: u64) -> Vec<FreqIndex> {
    let mut out = Vec::new();
    for_each_in_ball(dim, radius_sq, |k| out.push(k));
    out
}

/// All `k` in `Z^d` with `|k| <= radius`, lexicographically ordered.
///
/// The radius is a real number; an integer `|k|^2` is kept when it does not
/// exceed `radius^2` up to a relative `4 * EPSILON`, so radii such as
/// `sqrt(2)` that are not exactly representable still include their
/// boundary points.
pub fn enumerate_ball(d: usize, radius: f64) -> Result<Vec<FreqIndex>> {
    let dim = Dim::new(d)?;
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(Error::Config("ball radius must be finite and >= 0"));
    }
    let r2 = radius * radius * (1.0 + 4.0 * f64::EPSILON);
    if r2 >= (1u64 << 62) as f64 {
        return Err(Error::Config("ball radius too large"));
    }
    Ok(enumerate_ball_sq(dim, libm::floor(r2) as u64))
}

pub fn shell_members(d: usize, spec: ShellSpec) -> Result<Vec<FreqIndex>> {
    let dim = Dim::new(d)?;
    let mut out = Vec::new();
    for_each_in_ball(dim, spec.outer_radius_sq(), |k| {
        if spec.contains_sq(k.norm_sq()) {
            out.push(k);
        }
    });
    Ok(out)
}

/// Number of lattice points in a shell, without materialising them.
pub fn shell_count(dim: Dim, spec: ShellSpec) -> u64 {
    let mut n = 0;
    for_each_in_ball(dim, spec.outer_radius_sq(), |k| {
        if spec.contains_sq(k.norm_sq()) {
            n += 1;
        }
    });
    n
}

/// Volume of the unit Euclidean ball in `R^d`.
pub fn ball_volume(d: usize) -> f64 {
    let half = d as f64 / 2.0;
    libm::pow(core::f64::consts::PI, half) / libm::tgamma(half + 1.0)
}

/// `lim_j 2^(-jd) #shell_j`, the lattice density of the shell family.
pub fn shell_count_limit(d: usize, kind: ShellKind) -> f64 {
    let df = d as f64;
    let spread = match kind {
        ShellKind::Narrow => libm::exp2(df / 2.0) - libm::exp2(-df / 2.0),
        ShellKind::Wide => libm::exp2(df) - libm::exp2(-df),
    };
    ball_volume(d) * spread
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn brute_ball(d: usize, r_sq: i64) -> usize {
        let r = (r_sq as f64).sqrt() as i64 + 1;
        let range = || -r..=r;
        match d {
            1 => range().filter(|a| a * a <= r_sq).count(),
            2 => range()
                .flat_map(|a| range().map(move |b| a * a + b * b))
                .filter(|&n| n <= r_sq)
                .count(),
            3 => range()
                .flat_map(|a| range().flat_map(move |b| range().map(move |c| a * a + b * b + c * c)))
                .filter(|&n| n <= r_sq)
                .count(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn ball_examples() {
        let b = enumerate_ball(1, 2.5).unwrap();
        let ks: Vec<i64> = b.iter().map(|k| k.components()[0]).collect();
        assert_eq!(ks, vec![-2, -1, 0, 1, 2]);
        assert_eq!(enumerate_ball(2, 1.0).unwrap().len(), 5);
        assert_eq!(enumerate_ball(2, libm::sqrt(2.0)).unwrap().len(), 9);
        assert_eq!(brute_ball(2, 2), 9);
    }

    #[test]
    fn ball_rejects_bad_dimension() {
        assert_eq!(enumerate_ball(0, 1.0), Err(Error::Dimension(0)));
        assert_eq!(enumerate_ball(5, 1.0), Err(Error::Dimension(5)));
        assert!(enumerate_ball(1, -1.0).is_err());
    }

    #[test]
    fn ball_counts_match_brute_force() {
        for d in 1..=3 {
            let mut prev = 0;
            let rmax = if d == 3 { 12 } else { 32 };
            for r in 0..=rmax {
                let n = enumerate_ball_sq(Dim::new(d).unwrap(), (r * r) as u64).len();
                assert_eq!(n, brute_ball(d, r * r), "d={d} r={r}");
                assert!(n >= prev);
                prev = n;
            }
        }
    }

    #[test]
    fn ball_is_lexicographic() {
        let b = enumerate_ball(3, 3.0).unwrap();
        assert!(b.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn shell_examples() {
        let s1: Vec<i64> = shell_members(1, ShellSpec::narrow(1).unwrap())
            .unwrap()
            .iter()
            .map(|k| k.components()[0])
            .collect();
        assert_eq!(s1, vec![-2, 2]);
        let s2: Vec<i64> = shell_members(1, ShellSpec::narrow(2).unwrap())
            .unwrap()
            .iter()
            .map(|k| k.components()[0])
            .collect();
        assert_eq!(s2, vec![-5, -4, -3, 3, 4, 5]);
        // brute force over [-3,3]^2: 2 < a^2+b^2 <= 8
        let mut brute = 0;
        for a in -3i64..=3 {
            for b in -3i64..=3 {
                let n = a * a + b * b;
                if n > 2 && n <= 8 {
                    brute += 1;
                }
            }
        }
        assert_eq!(brute, 16);
        assert_eq!(shell_members(2, ShellSpec::narrow(1).unwrap()).unwrap().len(), 16);
    }

    #[test]
    fn narrow_shells_are_disjoint() {
        let dim = Dim::new(2).unwrap();
        for_each_in_ball(dim, 1 << 13, |k| {
            let n = k.norm_sq();
            let hits = (1..=6)
                .filter(|&j| ShellSpec::narrow(j).unwrap().contains_sq(n))
                .count();
            assert!(hits <= 1);
            if n > 2 {
                assert_eq!(hits, 1, "{k:?}");
            }
        });
    }

    #[test]
    fn shell_level_zero_rejected() {
        assert!(ShellSpec::narrow(0).is_err());
    }

    #[test]
    fn volumes() {
        assert!((ball_volume(1) - 2.0).abs() < 1e-14);
        assert!((ball_volume(2) - core::f64::consts::PI).abs() < 1e-14);
        assert!((ball_volume(3) - 4.0 * core::f64::consts::PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn shell_limits_match_counts() {
        let lim = shell_count_limit(1, ShellKind::Narrow);
        assert!((lim - core::f64::consts::SQRT_2).abs() < 1e-14);
        assert!((shell_count_limit(1, ShellKind::Wide) - 3.0).abs() < 1e-14);
        let dim = Dim::new(1).unwrap();
        let mut errs = vec![];
        for j in 1..=14 {
            let n = shell_count(dim, ShellSpec::narrow(j).unwrap()) as f64;
            errs.push((n / (1u64 << j) as f64 - lim).abs());
            assert!(errs.last().unwrap() * (1u64 << j) as f64 <= 2.0, "j={j}");
            let w = shell_count(dim, ShellSpec::wide(j).unwrap()) as f64;
            assert!((w / (1u64 << j) as f64 - 3.0).abs() * (1u64 << j) as f64 <= 2.0);
        }
        // envelope max_{i>=j} err_i decreases from j=4 on
        let env: Vec<f64> = (0..errs.len())
            .map(|j| errs[j..].iter().cloned().fold(0.0, f64::max))
            .collect();
        assert!(env[3..].windows(2).all(|w| w[1] <= w[0]));
        assert!(env[13] < env[3]);
    }

    #[test]
    fn isqrt_exact() {
        for n in 0..5000u64 {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n);
        }
    }
}
