//! Paraxial free-space propagation with the Fresnel transfer function
//! `H(fx, fy) = exp(i k d) exp(-i pi lambda d (fx^2 + fy^2))`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{ensure_same_grid, Error, Result};
use crate::fft::{signed_index, Fft2};
use crate::field::{cis, ComplexField};
use crate::grid::GridSpec;

/// Transfer function for one propagation distance, precomputed on the grid
/// (or on a zero-padded grid of twice the size).
#[derive(Debug, Clone)]
pub struct PropagationKernel {
    grid: GridSpec,
    distance: f64,
    padded: bool,
    transfer: Vec<Complex64>,
    fft: Fft2,
}

impl PropagationKernel {
    /// Kernel on the field's own grid. Negative distances propagate backwards.
    pub fn new(grid: GridSpec, distance: f64) -> Result<Self> {
        Self::build(grid, distance, false)
    }

    /// Kernel that zero-pads fields to `2n` before propagating and crops afterwards,
    /// suppressing wrap-around at long distances. Power leaving the window is lost.
    pub fn padded(grid: GridSpec, distance: f64) -> Result<Self> {
        Self::build(grid, distance, true)
    }

    fn build(grid: GridSpec, distance: f64, padded: bool) -> Result<Self> {
        if !distance.is_finite() {
            return Err(Error::Config(alloc::format!(
                "propagation distance must be finite, got {distance}"
            )));
        }
        let n = if padded { 2 * grid.n() } else { grid.n() };
        let side = n as f64 * grid.dx();
        let lambda = grid.wavelength();
        let carrier = carrier_phase(distance, lambda);
        let mut transfer = Vec::with_capacity(n * n);
        for row in 0..n {
            let fy = signed_index(row, n) as f64 / side;
            for col in 0..n {
                let fx = signed_index(col, n) as f64 / side;
                let chirp = -PI * lambda * distance * (fx * fx + fy * fy);
                transfer.push(cis(carrier + chirp));
            }
        }
        Ok(Self {
            grid,
            distance,
            padded,
            transfer,
            fft: Fft2::new(n),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn is_padded(&self) -> bool {
        self.padded
    }

    /// Transfer-function samples in DFT order.
    pub fn transfer(&self) -> &[Complex64] {
        &self.transfer
    }

    /// `IDFT[DFT(u) * H]`.
    pub fn propagate(&self, field: &ComplexField) -> Result<ComplexField> {
        self.apply(field, false)
    }

    /// Adjoint operator `IDFT[DFT(v) * conj(H)]`, i.e. propagation by `-d`.
    pub fn propagate_adjoint(&self, field: &ComplexField) -> Result<ComplexField> {
        self.apply(field, true)
    }

    fn apply(&self, field: &ComplexField, adjoint: bool) -> Result<ComplexField> {
        ensure_same_grid(&self.grid, field.grid())?;
        let n = self.grid.n();
        let mut work = if self.padded {
            let m = 2 * n;
            let off = n / 2;
            let mut buf = vec![Complex64::new(0.0, 0.0); m * m];
            for (r, row) in field.values().chunks_exact(n).enumerate() {
                buf[(r + off) * m + off..(r + off) * m + off + n].copy_from_slice(row);
            }
            buf
        } else {
            field.values().to_vec()
        };
        self.fft.forward(&mut work);
        if adjoint {
            for (w, h) in work.iter_mut().zip(&self.transfer) {
                *w *= h.conj();
            }
        } else {
            for (w, h) in work.iter_mut().zip(&self.transfer) {
                *w *= h;
            }
        }
        self.fft.inverse(&mut work);
        if self.padded {
            let m = 2 * n;
            let off = n / 2;
            let mut out = Vec::with_capacity(n * n);
            for r in 0..n {
                out.extend_from_slice(&work[(r + off) * m + off..(r + off) * m + off + n]);
            }
            work = out;
        }
        ComplexField::new(self.grid, work)
    }
}

/// `k d` reduced modulo `2 pi`, computed from the exact remainder of `d / lambda`
/// so that long distances keep full phase accuracy.
fn carrier_phase(distance: f64, lambda: f64) -> f64 {
    let cycles = distance / lambda;
    let residual = libm::fma(-cycles, lambda, distance) / lambda;
    let frac = (cycles - libm::floor(cycles)) + residual;
    2.0 * PI * frac
}

pub fn make_kernel(grid: GridSpec, distance: f64) -> Result<PropagationKernel> {
    PropagationKernel::new(grid, distance)
}

pub fn propagate(field: &ComplexField, kernel: &PropagationKernel) -> Result<ComplexField> {
    kernel.propagate(field)
}

pub fn propagate_adjoint(field: &ComplexField, kernel: &PropagationKernel) -> Result<ComplexField> {
    kernel.propagate_adjoint(field)
}

/// Pointwise product of a field with a transmission mask `t` (passive: `|t| <= 1`).
pub fn layer_transmit(field: &ComplexField, transmission: &[Complex64]) -> Result<ComplexField> {
    if transmission.len() != field.values().len() {
        return Err(Error::Dimension {
            expected: field.values().len(),
            found: transmission.len(),
        });
    }
    if transmission.iter().any(|t| t.norm_sqr() > 1.0 + 1e-12) {
        return Err(Error::Domain("transmission exceeds unit modulus".into()));
    }
    let values = field
        .values()
        .iter()
        .zip(transmission)
        .map(|(u, t)| u * t)
        .collect();
    ComplexField::new(*field.grid(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_vortex_beam;

    fn grid() -> GridSpec {
        GridSpec::desk(32).unwrap()
    }

    #[test]
    fn zero_distance_is_identity() {
        let k = PropagationKernel::new(grid(), 0.0).unwrap();
        assert!(k.transfer().iter().all(|h| *h == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn forward_and_backward_kernels_cancel() {
        let a = PropagationKernel::new(grid(), 0.0731).unwrap();
        let b = PropagationKernel::new(grid(), -0.0731).unwrap();
        for (x, y) in a.transfer().iter().zip(b.transfer()) {
            assert!((x * y - 1.0).norm() < 1e-12);
            assert!((x.conj() - y).norm() < 1e-12);
            assert!((x.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn kernels_compose_additively() {
        // Dyadic distances keep d1 + d2 exact.
        let (d1, d2) = (0.03125, 0.0625 + 0.001953125);
        let a = PropagationKernel::new(grid(), d1).unwrap();
        let b = PropagationKernel::new(grid(), d2).unwrap();
        let c = PropagationKernel::new(grid(), d1 + d2).unwrap();
        for ((x, y), z) in a.transfer().iter().zip(b.transfer()).zip(c.transfer()) {
            assert!((x * y - z).norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip_restores_field() {
        let g = grid();
        let u = make_vortex_beam(g, -3, 1.5e-3).unwrap();
        let k = PropagationKernel::new(g, 0.2).unwrap();
        let back = k.propagate_adjoint(&k.propagate(&u).unwrap()).unwrap();
        for (a, b) in back.values().iter().zip(u.values()) {
            assert!((a - b).norm() < 1e-12 * 100.0);
        }
        assert!((k.propagate(&u).unwrap().power() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn padded_kernel_keeps_contained_beam() {
        let g = grid();
        let u = make_vortex_beam(g, 1, 1e-3).unwrap();
        let plain = PropagationKernel::new(g, 0.05)
            .unwrap()
            .propagate(&u)
            .unwrap();
        let padded = PropagationKernel::padded(g, 0.05)
            .unwrap()
            .propagate(&u)
            .unwrap();
        let diff: f64 = plain
            .values()
            .iter()
            .zip(padded.values())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        assert!(diff.sqrt() < 1e-3 * plain.power().sqrt() / g.dx());
    }

    #[test]
    fn transmit_checks_inputs() {
        let g = grid();
        let u = make_vortex_beam(g, 1, 1e-3).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); g.len()];
        assert_eq!(layer_transmit(&u, &ones).unwrap(), u);
        assert!(layer_transmit(&u, &ones[1..]).is_err());
        let mut gain = ones.clone();
        gain[5] = Complex64::new(1.5, 0.0);
        assert!(matches!(layer_transmit(&u, &gain), Err(Error::Domain(_))));
        let phase: Vec<Complex64> = (0..g.len()).map(|i| cis(i as f64 * 0.3)).collect();
        let out = layer_transmit(&u, &phase).unwrap();
        assert!((out.power() - u.power()).abs() < 1e-12);
    }
}
