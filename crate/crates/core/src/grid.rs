use alloc::format;
use core::f64::consts::PI;

use crate::error::{Error, Result};

/// Default physical side length of the simulation window, in meters.
pub const DEFAULT_APERTURE: f64 = 0.02;
/// He-Ne wavelength used throughout the experiment, in meters.
pub const DEFAULT_WAVELENGTH: f64 = 633e-9;

/// Square sampling grid shared by every field, screen and layer.
///
/// Pixel `(row, col)` has its center at `((col - n/2 + 0.5) dx, (row - n/2 + 0.5) dx)`,
/// so no sample lands exactly on the optical axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n: usize,
    dx: f64,
    wavelength: f64,
}

impl GridSpec {
    pub fn new(n: usize, dx: f64, wavelength: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n must be a power of two >= 8, got {n}"
            )));
        }
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::InvalidGrid(format!("dx must be positive, got {dx}")));
        }
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        Ok(Self { n, dx, wavelength })
    }

    /// Grid of `n` samples spanning `side` meters.
    pub fn with_side(n: usize, side: f64, wavelength: f64) -> Result<Self> {
        Self::new(n, side / n as f64, wavelength)
    }

    /// `n` samples over the default 2 cm window at 633 nm.
    pub fn desk(n: usize) -> Result<Self> {
        Self::with_side(n, DEFAULT_APERTURE, DEFAULT_WAVELENGTH)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Number of samples, `n * n`.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Physical side length `n * dx`.
    pub fn side(&self) -> f64 {
        self.n as f64 * self.dx
    }

    pub fn k0(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Physical coordinate of the center of sample `i` along either axis.
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64 + 0.5) * self.dx
    }

    /// Fractional sample index of a physical coordinate (inverse of [`coord`](Self::coord)).
    pub fn index_of(&self, x: f64) -> f64 {
        x / self.dx + (self.n / 2) as f64 - 0.5
    }

    /// Spatial frequency (cycles per meter) of DFT bin `i`.
    pub fn freq(&self, i: usize) -> f64 {
        crate::fft::signed_index(i, self.n) as f64 / self.side()
    }

    /// Same window resampled with `n` samples per side.
    pub fn resampled(&self, n: usize) -> Result<Self> {
        Self::with_side(n, self.side(), self.wavelength)
    }
}
