//! Mode purity by azimuthal decomposition, and image-fidelity measures.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{cis, ComplexField};
use crate::image::Image;

/// Default range of topological charges resolved by [`oam_decompose`].
pub const DEFAULT_ELL_RANGE: (i32, i32) = (-10, 10);

/// Normalized power per OAM charge over an inclusive range.
#[derive(Debug, Clone, PartialEq)]
pub struct OamSpectrum {
    ell_min: i32,
    ell_max: i32,
    weights: Vec<f64>,
}

impl OamSpectrum {
    pub fn ell_min(&self) -> i32 {
        self.ell_min
    }

    pub fn ell_max(&self) -> i32 {
        self.ell_max
    }

    /// Weights indexed from `ell_min` upwards; they sum to one.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, ell: i32) -> Option<f64> {
        if (self.ell_min..=self.ell_max).contains(&ell) {
            Some(self.weights[(ell - self.ell_min) as usize])
        } else {
            None
        }
    }

    /// `(ell, weight)` pairs in increasing `ell`.
    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        (self.ell_min..=self.ell_max).zip(self.weights.iter().copied())
    }

    /// Fraction of the resolved power carried by charge `m`.
    pub fn mode_purity(&self, m: i32) -> Result<f64> {
        self.weight(m).ok_or_else(|| {
            Error::Precondition(format!(
                "charge {m} outside decomposed range [{}, {}]",
                self.ell_min, self.ell_max
            ))
        })
    }
}

/// Azimuthal (spiral) spectrum of a field.
///
/// The Cartesian field is resampled by cubic convolution onto `n/2` radii
/// spanning the inscribed circle and `4 * max|ell|` angles; each ring is projected
/// onto `exp(i ell theta)` and the ring powers are accumulated with weight `r`.
pub fn oam_decompose(field: &ComplexField, ell_min: i32, ell_max: i32) -> Result<OamSpectrum> {
    if ell_min > ell_max {
        return Err(Error::Precondition(format!(
            "empty charge range [{ell_min}, {ell_max}]"
        )));
    }
    let grid = field.grid();
    let n = grid.n();
    let radial = n / 2;
    let widest = ell_min.unsigned_abs().max(ell_max.unsigned_abs()).max(1) as usize;
    let angular = 4 * widest;
    let dr = grid.side() / 2.0 / radial as f64;

    let angle = |k: usize| 2.0 * PI * k as f64 / angular as f64;
    let directions: Vec<Complex64> = (0..angular).map(|k| cis(angle(k))).collect();
    let charges: Vec<i32> = (ell_min..=ell_max).collect();
    let basis: Vec<Complex64> = charges
        .iter()
        .flat_map(|&ell| (0..angular).map(move |k| cis(-(ell as f64) * angle(k))))
        .collect();
    let mut power = alloc::vec![0.0; charges.len()];
    let mut ring = alloc::vec![Complex64::new(0.0, 0.0); angular];

    for j in 0..radial {
        let r = (j as f64 + 0.5) * dr;
        for (sample, d) in ring.iter_mut().zip(&directions) {
            *sample = cubic(field, r * d.re, r * d.im);
        }
        for (slot, row) in power.iter_mut().zip(basis.chunks_exact(angular)) {
            let acc: Complex64 = ring.iter().zip(row).map(|(s, b)| s * b).sum();
            *slot += r * (acc / angular as f64).norm_sqr();
        }
    }

    let total: f64 = power.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Degenerate(
            "field has no power inside the decomposition disc",
        ));
    }
    Ok(OamSpectrum {
        ell_min,
        ell_max,
        weights: power.into_iter().map(|p| p / total).collect(),
    })
}

/// [`oam_decompose`] over [`DEFAULT_ELL_RANGE`].
pub fn oam_spectrum(field: &ComplexField) -> Result<OamSpectrum> {
    oam_decompose(field, DEFAULT_ELL_RANGE.0, DEFAULT_ELL_RANGE.1)
}

pub fn mode_purity(spectrum: &OamSpectrum, m: i32) -> Result<f64> {
    spectrum.mode_purity(m)
}

/// Keys cubic-convolution weights (a = -1/2) for offset `t` in [0, 1).
fn keys_weights(t: f64) -> [f64; 4] {
    let w = |x: f64| {
        let x = x.abs();
        if x <= 1.0 {
            (1.5 * x - 2.5) * x * x + 1.0
        } else if x < 2.0 {
            ((-0.5 * x + 2.5) * x - 4.0) * x + 2.0
        } else {
            0.0
        }
    };
    [w(1.0 + t), w(t), w(1.0 - t), w(2.0 - t)]
}

/// Cubic-convolution interpolation between pixel centers, with indices
/// clamped at the window edge.
fn cubic(field: &ComplexField, x: f64, y: f64) -> Complex64 {
    let grid = field.grid();
    let n = grid.n();
    let max = (n - 1) as f64;
    let fx = grid.index_of(x).clamp(0.0, max);
    let fy = grid.index_of(y).clamp(0.0, max);
    let (c0, r0) = (libm::floor(fx), libm::floor(fy));
    let (wx, wy) = (keys_weights(fx - c0), keys_weights(fy - r0));
    let clamp = |i: f64| (i.max(0.0) as usize).min(n - 1);
    let v = field.values();
    let mut acc = Complex64::new(0.0, 0.0);
    for (dr, wr) in wy.iter().enumerate() {
        let r = clamp(r0 + dr as f64 - 1.0);
        let mut row = Complex64::new(0.0, 0.0);
        for (dc, wc) in wx.iter().enumerate() {
            row += v[r * n + clamp(c0 + dc as f64 - 1.0)] * *wc;
        }
        acc += row * *wr;
    }
    acc
}

/// Mean squared pixel difference.
pub fn mse(pred: &Image, truth: &Image) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::Dimension {
            expected: truth.len(),
            found: pred.len(),
        });
    }
    let sum: f64 = pred
        .as_slice()
        .iter()
        .zip(truth.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / pred.len() as f64)
}

/// Peak signal-to-noise ratio in dB for images on `[0, 1]`.
/// Identical images give `f64::INFINITY`.
pub fn psnr(pred: &Image, truth: &Image) -> Result<f64> {
    let err = mse(pred, truth)?;
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * libm::log10(1.0 / err))
}
