//! Radix-2 two-dimensional FFT with unitary scaling.
//!
//! Grids are always powers of two, so a plain iterative Cooley-Tukey transform
//! covers every size the crate accepts and keeps the core free of `std`.
//! The forward transform uses the negative exponent; both directions scale by
//! `1/n` overall (`1/sqrt(n)` per axis), so the transform is unitary and its
//! adjoint is its inverse.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

/// Signed frequency index of DFT bin `i` on an `n`-point transform.
pub fn signed_index(i: usize, n: usize) -> isize {
    if i < n / 2 {
        i as isize
    } else {
        i as isize - n as isize
    }
}

#[derive(Debug, Clone)]
pub struct Fft2 {
    n: usize,
    twiddles: Vec<Complex64>,
    bit_reverse: Vec<usize>,
}

impl Fft2 {
    /// Plan for `n x n` arrays. `n` must be a power of two.
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two(), "fft size must be a power of two");
        let twiddles = (0..n / 2)
            .map(|k| {
                let angle = -2.0 * PI * k as f64 / n as f64;
                Complex64::new(libm::cos(angle), libm::sin(angle))
            })
            .collect();
        let bits = n.trailing_zeros();
        let bit_reverse = (0..n)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (usize::BITS - bits)
                }
            })
            .collect();
        Self {
            n,
            twiddles,
            bit_reverse,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, false);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, true);
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        assert_eq!(data.len(), n * n, "fft input has wrong length");
        for row in data.chunks_exact_mut(n) {
            self.transform_1d(row, inverse);
        }
        let mut column = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..n {
            for (r, v) in column.iter_mut().enumerate() {
                *v = data[r * n + c];
            }
            self.transform_1d(&mut column, inverse);
            for (r, v) in column.iter().enumerate() {
                data[r * n + c] = *v;
            }
        }
        let scale = 1.0 / n as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn transform_1d(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.n;
        for i in 0..n {
            let j = self.bit_reverse[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let stride = n / size;
            for start in (0..n).step_by(size) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let w = if inverse { w.conj() } else { w };
                    let t = w * buf[start + k + half];
                    let u = buf[start + k];
                    buf[start + k] = u + t;
                    buf[start + k + half] = u - t;
                }
            }
            size *= 2;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(data: &[Complex64], n: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for u in 0..n {
            for v in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for r in 0..n {
                    for c in 0..n {
                        let angle = -2.0 * PI * ((u * r + v * c) % n) as f64 / n as f64;
                        acc += data[r * n + c] * Complex64::new(angle.cos(), angle.sin());
                    }
                }
                out[u * n + v] = acc / n as f64;
            }
        }
        out
    }

    fn test_data(n: usize) -> Vec<Complex64> {
        (0..n * n)
            .map(|i| {
                let x = i as f64;
                Complex64::new((0.37 * x).sin() + 0.1 * x / n as f64, (1.3 * x).cos())
            })
            .collect()
    }

    #[test]
    fn matches_direct_dft() {
        for n in [1usize, 2, 8, 16] {
            let data = test_data(n);
            let mut fast = data.clone();
            Fft2::new(n).forward(&mut fast);
            let slow = naive_dft(&data, n);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-12, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn inverse_round_trip_and_parseval() {
        let n = 32;
        let data = test_data(n);
        let plan = Fft2::new(n);
        let mut spec = data.clone();
        plan.forward(&mut spec);
        let p0: f64 = data.iter().map(|v| v.norm_sqr()).sum();
        let p1: f64 = spec.iter().map(|v| v.norm_sqr()).sum();
        assert!((p0 - p1).abs() / p0 < 1e-13);
        plan.inverse(&mut spec);
        for (a, b) in spec.iter().zip(&data) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn signed_indices() {
        assert_eq!(signed_index(0, 8), 0);
        assert_eq!(signed_index(3, 8), 3);
        assert_eq!(signed_index(4, 8), -4);
        assert_eq!(signed_index(7, 8), -1);
    }
}
