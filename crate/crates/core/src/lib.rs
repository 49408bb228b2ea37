//! Wave-optics core for diffractive-network adaptive optics of vortex beams in
//! oceanic turbulence.
//!
//! Everything here is pure computation over `alloc`; the crate builds without
//! `std` (disable the default `std` feature). With `std`, batch gradients are
//! evaluated in parallel.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod ddnn;
pub mod encoding;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod image;
pub mod metrics;
pub mod pipeline;
pub mod propagation;
pub mod turbulence;

pub use num_complex::Complex64;

pub use encoding::ScreenEncoding;
pub use error::{Error, Result};
pub use field::{make_vortex_beam, ComplexField, PhaseScreen};
pub use grid::GridSpec;
pub use image::Image;
pub use metrics::{mode_purity, oam_decompose, psnr, OamSpectrum};
pub use propagation::{layer_transmit, make_kernel, propagate, PropagationKernel};
pub use turbulence::{make_screen, standard_levels, ScreenRng, TurbulenceParams};
