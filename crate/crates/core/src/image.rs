use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Square real-valued raster stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    n: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Dimension {
                expected: n * n,
                found: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn filled(n: usize, value: f64) -> Self {
        Self {
            n,
            data: vec![value; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                data.push(f(r, c));
            }
        }
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n + col]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// `(min, max)` over all pixels.
    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Whether every pixel lies in `[0, 1]`.
    pub fn is_unit_range(&self) -> bool {
        self.data.iter().all(|v| (0.0..=1.0).contains(v))
    }

    /// Linear rescale so the minimum maps to 0 and the maximum to 1.
    pub fn normalized(&self) -> Result<Self> {
        let (lo, hi) = self.min_max();
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::Degenerate("image contains non-finite values"));
        }
        let span = hi - lo;
        if span <= 0.0 {
            return Err(Error::Degenerate("cannot normalize a constant image"));
        }
        let data = self
            .data
            .iter()
            .map(|&v| ((v - lo) / span).clamp(0.0, 1.0))
            .collect();
        Ok(Self { n: self.n, data })
    }

    /// Separable bilinear resampling to `target` pixels per side.
    ///
    /// Corners are aligned: target pixel `i` samples source coordinate
    /// `i * (n - 1) / (target - 1)`, so the outermost pixel centers coincide.
    pub fn resize_bilinear(&self, target: usize) -> Result<Self> {
        if self.n < 8 || target < 8 {
            return Err(Error::Precondition(alloc::format!(
                "resize needs both sizes >= 8, got {} -> {}",
                self.n,
                target
            )));
        }
        if target == self.n {
            return Ok(self.clone());
        }
        let taps = axis_taps(self.n, target);
        // Rows first, then columns.
        let mut horizontal = vec![0.0; self.n * target];
        for r in 0..self.n {
            let src = &self.data[r * self.n..(r + 1) * self.n];
            for (c, &(i0, w)) in taps.iter().enumerate() {
                horizontal[r * target + c] = lerp(src, i0, w);
            }
        }
        let mut data = vec![0.0; target * target];
        let mut column = vec![0.0; self.n];
        for c in 0..target {
            for (r, v) in column.iter_mut().enumerate() {
                *v = horizontal[r * target + c];
            }
            for (r, &(i0, w)) in taps.iter().enumerate() {
                data[r * target + c] = lerp(&column, i0, w);
            }
        }
        Ok(Self { n: target, data })
    }
}

fn axis_taps(source: usize, target: usize) -> Vec<(usize, f64)> {
    let scale = (source - 1) as f64 / (target - 1) as f64;
    (0..target)
        .map(|i| {
            let x = i as f64 * scale;
            let i0 = (libm::floor(x) as usize).min(source - 2);
            (i0, x - i0 as f64)
        })
        .collect()
}

fn lerp(src: &[f64], i0: usize, w: f64) -> f64 {
    src[i0] * (1.0 - w) + src[i0 + 1] * w
}
