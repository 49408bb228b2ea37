//! Complex optical fields, phase screens and vortex-beam synthesis.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{ensure_same_grid, Error, Result};
use crate::grid::GridSpec;
use crate::image::Image;

/// Unit phasor `exp(i * theta)`.
#[inline]
pub fn cis(theta: f64) -> Complex64 {
    Complex64::new(libm::cos(theta), libm::sin(theta))
}

/// Sampled scalar field on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension {
                expected: grid.len(),
                found: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(f64, f64) -> Complex64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for r in 0..n {
            let y = grid.coord(r);
            for c in 0..n {
                values.push(f(grid.coord(c), y));
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Total power `sum |u|^2 dx^2`.
    pub fn power(&self) -> f64 {
        let dx = self.grid.dx();
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx * dx
    }

    /// Copy rescaled to unit total power.
    pub fn normalized_power(&self) -> Result<Self> {
        let p = self.power();
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::Degenerate("field has zero or non-finite power"));
        }
        let s = 1.0 / libm::sqrt(p);
        Ok(self.scaled(Complex64::new(s, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Pointwise `a * self + b * other`.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        ensure_same_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(u, v)| a * u + b * v)
                .collect(),
        })
    }

    /// `exp(i phi) * u` pointwise. Power is unchanged.
    pub fn apply_phase(&self, screen: &PhaseScreen) -> Result<Self> {
        ensure_same_grid(&self.grid, &screen.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&screen.phase)
                .map(|(u, &phi)| u * cis(phi))
                .collect(),
        })
    }

    /// Pointwise `|u|^2`.
    pub fn intensity(&self) -> Image {
        let data = self.values.iter().map(|v| v.norm_sqr()).collect();
        Image::new(self.grid.n(), data).expect("field and image sizes agree")
    }

    /// Inner product `<self, other> = sum conj(self) * other` (no area weight).
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        ensure_same_grid(&self.grid, &other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(u, v)| u.conj() * v)
            .sum())
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// Real phase map in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseScreen {
    grid: GridSpec,
    phase: Vec<f64>,
}

impl PhaseScreen {
    pub fn new(grid: GridSpec, phase: Vec<f64>) -> Result<Self> {
        if phase.len() != grid.len() {
            return Err(Error::Dimension {
                expected: grid.len(),
                found: phase.len(),
            });
        }
        if phase.iter().any(|p| !p.is_finite()) {
            return Err(Error::Domain(
                "phase screen contains non-finite values".into(),
            ));
        }
        Ok(Self { grid, phase })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            phase: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    pub fn into_phase(self) -> Vec<f64> {
        self.phase
    }

    /// Pointwise negation.
    pub fn negated(&self) -> Self {
        Self {
            grid: self.grid,
            phase: self.phase.iter().map(|p| -p).collect(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.phase.iter().sum::<f64>() / self.phase.len() as f64
    }

    /// Population variance over pixels.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.phase.iter().map(|p| (p - m) * (p - m)).sum::<f64>() / self.phase.len() as f64
    }

    /// Copy with the mean (piston) subtracted.
    pub fn without_piston(&self) -> Self {
        let m = self.mean();
        Self {
            grid: self.grid,
            phase: self.phase.iter().map(|p| p - m).collect(),
        }
    }

    pub fn as_image(&self) -> Image {
        Image::new(self.grid.n(), self.phase.clone()).expect("screen and image sizes agree")
    }
}

/// Laguerre-Gaussian vortex (`p = 0`) centered on the grid, normalized to unit power:
/// `u = (sqrt(2) r / w)^|l| exp(-r^2 / w^2) exp(i l theta)`.
pub fn make_vortex_beam(grid: GridSpec, ell: i32, waist: f64) -> Result<ComplexField> {
    if !(waist.is_finite() && waist > 0.0) {
        return Err(Error::Config(format!(
            "beam waist must be positive, got {waist}"
        )));
    }
    if waist > grid.side() / 2.0 {
        return Err(Error::Config(format!(
            "beam waist {waist} m exceeds half the window ({} m); the beam would be clipped",
            grid.side() / 2.0
        )));
    }
    let order = ell.unsigned_abs() as usize;
    if order > grid.n() / 4 {
        return Err(Error::Config(format!(
            "topological charge {ell} is not resolvable on a {}-sample grid",
            grid.n()
        )));
    }
    let field = ComplexField::from_fn(grid, |x, y| {
        let r2 = x * x + y * y;
        let radial = libm::pow(libm::sqrt(2.0 * r2) / waist, order as f64);
        let theta = libm::atan2(y, x);
        cis(ell as f64 * theta) * (radial * libm::exp(-r2 / (waist * waist)))
    });
    field.normalized_power()
}
