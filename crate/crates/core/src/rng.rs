//! Counter-based pseudo-random generation (Philox4x32-10).
//!
//! Every draw is a pure function of `(key, counter)`, so a coefficient can be
//! regenerated from `(seed, trial, k)` alone, in any order and on any thread.

use num_complex::Complex64;

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = a as u64 * b as u64;
    ((p >> 32) as u32, p as u32)
}

/// Philox4x32 with 10 rounds.
pub fn philox4x32(key: [u32; 2], counter: [u32; 4]) -> [u32; 4] {
    let mut k = key;
    let mut c = counter;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, c[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

/// SplitMix64 finalizer, used to derive Philox keys.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A Philox key bound to one `(seed, trial, domain)` triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamKey([u32; 2]);

impl StreamKey {
    pub fn new(seed: u64, trial: u64, domain: u64) -> Self {
        let z = mix64(seed ^ mix64(trial ^ mix64(domain)));
        StreamKey([z as u32, (z >> 32) as u32])
    }

    #[inline]
    pub fn block(&self, counter: [u32; 4]) -> [u32; 4] {
        philox4x32(self.0, counter)
    }
}

#[inline]
fn unit_open_closed(hi: u32, lo: u32) -> f64 {
    // (0, 1]
    let x = ((hi as u64) << 32 | lo as u64) >> 11;
    (x + 1) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

#[inline]
fn unit_closed_open(hi: u32, lo: u32) -> f64 {
    // [0, 1)
    let x = ((hi as u64) << 32 | lo as u64) >> 11;
    x as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// Maps one Philox block to a complex standard Gaussian
/// `(g_re + i g_im) / sqrt 2`, i.e. modulus `sqrt(-ln u)` and uniform phase.
/// `|gamma|^2` is then exactly standard exponential.
#[inline]
pub fn complex_gaussian_from_block(b: [u32; 4]) -> Complex64 {
    let u = unit_open_closed(b[0], b[1]);
    let v = unit_closed_open(b[2], b[3]);
    let r = libm::sqrt(-libm::log(u));
    let (s, c) = libm::sincos(core::f64::consts::TAU * v);
    Complex64::new(r * c, r * s)
}

/// A sequential stream of draws over one key; position `i` maps to counter
/// `(i_lo, i_hi, 0, 0)`.
#[derive(Clone, Debug)]
pub struct CounterStream {
    key: StreamKey,
    position: u64,
}

impl CounterStream {
    pub fn new(seed: u64, trial: u64, domain: u64) -> Self {
        CounterStream {
            key: StreamKey::new(seed, trial, domain),
            position: 0,
        }
    }

    pub fn position(&self) -> u64 {
        self.position
    }

    pub fn seek(&mut self, position: u64) {
        self.position = position;
    }

    #[inline]
    fn next_block(&mut self) -> [u32; 4] {
        let p = self.position;
        self.position = p.wrapping_add(1);
        self.key.block([p as u32, (p >> 32) as u32, 0, 0])
    }

    /// Uniform on `[0, 1)`.
    pub fn next_uniform(&mut self) -> f64 {
        let b = self.next_block();
        unit_closed_open(b[0], b[1])
    }

    /// Real standard Gaussian (Box-Muller, one value per block).
    pub fn next_real_gaussian(&mut self) -> f64 {
        core::f64::consts::SQRT_2 * self.next_complex_gaussian().re
    }

    /// Complex standard Gaussian, `E|gamma|^2 = 1`.
    pub fn next_complex_gaussian(&mut self) -> Complex64 {
        complex_gaussian_from_block(self.next_block())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn philox_known_answer() {
        // Random123 kat_vectors, philox4x32_10
        assert_eq!(philox4x32([0, 0], [0, 0, 0, 0]), [0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8]);
        assert_eq!(
            philox4x32([0xffffffff, 0xffffffff], [0xffffffff; 4]),
            [0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd]
        );
        assert_eq!(
            philox4x32([0xa4093822, 0x299f31d0], [0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344]),
            [0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1]
        );
    }

    #[test]
    fn stream_is_replayable() {
        let mut a = CounterStream::new(7, 3, 1);
        let xs: [f64; 4] = core::array::from_fn(|_| a.next_uniform());
        a.seek(2);
        assert_eq!(a.next_uniform(), xs[2]);
        let mut b = CounterStream::new(7, 4, 1);
        assert_ne!(b.next_uniform(), xs[0]);
    }

    #[test]
    fn uniform_ranges() {
        assert_eq!(unit_open_closed(0, 0), 1.0 / 9_007_199_254_740_992.0);
        assert_eq!(unit_open_closed(u32::MAX, u32::MAX), 1.0);
        assert_eq!(unit_closed_open(0, 0), 0.0);
        assert!(unit_closed_open(u32::MAX, u32::MAX) < 1.0);
    }
}
