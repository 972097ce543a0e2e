//! Separable multi-dimensional DFT with positive exponent and no scaling:
//! `X[m] = sum_n x[n] exp(+2 pi i n.m / M)`. Power-of-two lengths use an
//! iterative radix-2 transform, other lengths a direct O(M^2) pass per line.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

struct Plan {
    len: usize,
    twiddles: Vec<Complex64>,
}

impl Plan {
    fn new(len: usize) -> Self {
        let twiddles = (0..len / 2)
            .map(|i| {
                let (s, c) = libm::sincos(core::f64::consts::TAU * i as f64 / len as f64);
                Complex64::new(c, s)
            })
            .collect();
        Plan { len, twiddles }
    }

    fn run(&self, buf: &mut [Complex64]) {
        let n = self.len;
        if n <= 1 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let step = n / size;
            for start in (0..n).step_by(size) {
                for t in 0..half {
                    let w = self.twiddles[t * step];
                    let a = buf[start + t];
                    let b = buf[start + t + half] * w;
                    buf[start + t] = a + b;
                    buf[start + t + half] = a - b;
                }
            }
            size *= 2;
        }
    }
}

fn direct(line: &mut [Complex64], scratch: &mut Vec<Complex64>) {
    let m = line.len();
    scratch.clear();
    scratch.extend_from_slice(line);
    for (out_i, out) in line.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, x) in scratch.iter().enumerate() {
            let phase = ((n * out_i) % m) as f64 / m as f64;
            let (s, c) = libm::sincos(core::f64::consts::TAU * phase);
            acc += x * Complex64::new(c, s);
        }
        *out = acc;
    }
}

/// In-place transform of a row-major `m^d` array along every axis.
pub fn transform(data: &mut [Complex64], d: usize, m: usize) {
    assert_eq!(data.len(), m.pow(d as u32), "array is not m^d");
    let plan = m.is_power_of_two().then(|| Plan::new(m));
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    let mut scratch = Vec::new();
    for axis in 0..d {
        let stride = m.pow((d - 1 - axis) as u32);
        let block = stride * m;
        for base in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                if stride == 1 {
                    let row = &mut data[start..start + m];
                    match &plan {
                        Some(p) => p.run(row),
                        None => direct(row, &mut scratch),
                    }
                    continue;
                }
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[start + i * stride];
                }
                match &plan {
                    Some(p) => p.run(&mut line),
                    None => direct(&mut line, &mut scratch),
                }
                for (i, v) in line.iter().enumerate() {
                    data[start + i * stride] = *v;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(x: &[Complex64]) -> Vec<Complex64> {
        let m = x.len();
        (0..m)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(n, v)| v * Complex64::from_polar(1.0, std::f64::consts::TAU * (n * k) as f64 / m as f64))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        for m in [1usize, 2, 4, 8, 32, 6, 15] {
            let x: Vec<Complex64> = (0..m).map(|i| Complex64::new((i as f64 * 0.7).sin(), (i as f64).cos())).collect();
            let mut y = x.clone();
            transform(&mut y, 1, m);
            for (a, b) in y.iter().zip(naive(&x)) {
                assert!((a - b).norm() < 1e-12 * m as f64, "m={m}");
            }
        }
    }

    #[test]
    fn two_dimensional_is_separable() {
        let m = 8;
        let mut x = vec![Complex64::new(0.0, 0.0); m * m];
        // single mode (2, 3) -> exp(i 2pi (2 a + 3 b)/8)
        x[2 * m + 3] = Complex64::new(1.0, 0.0);
        transform(&mut x, 2, m);
        for a in 0..m {
            for b in 0..m {
                let want = Complex64::from_polar(1.0, std::f64::consts::TAU * (2 * a + 3 * b) as f64 / m as f64);
                assert!((x[a * m + b] - want).norm() < 1e-12);
            }
        }
    }
}
