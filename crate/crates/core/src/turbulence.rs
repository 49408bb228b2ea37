//! Oceanic refractive-index spectrum and phase-screen synthesis by power-spectrum inversion.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fft::{signed_index, Fft2};
use crate::field::PhaseScreen;
use crate::grid::{GridSpec, DEFAULT_WAVELENGTH};

const A_T: f64 = 1.863e-2;
const A_S: f64 = 1.9e-4;
const A_TS: f64 = 9.41e-3;

/// Balance between temperature and salinity fluctuations when none is given.
pub const DEFAULT_TAU: f64 = -2.5;
/// Kolmogorov inner scale when none is given, meters.
pub const DEFAULT_ETA: f64 = 1e-3;
/// Dissipation rate used to back out `chi_t` from a bare `cn2`, m^2/s^3.
pub const DEFAULT_EPSILON: f64 = 1e-5;
/// Channel length of every standard level, meters.
pub const STANDARD_DISTANCE: f64 = 30.0;
/// `cn2` of the four standard levels, weak to strong, K^2 m^(-2/3).
pub const STANDARD_CN2: [f64; 4] = [1e-15, 1e-14, 1e-13, 1e-12];

/// Physical parameters of a homogeneous, isotropic oceanic channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbulenceParams {
    cn2: f64,
    epsilon: f64,
    chi_t: f64,
    tau: f64,
    eta: f64,
    z: f64,
    k0: f64,
}

impl TurbulenceParams {
    /// Build from dissipation rates; `cn2 = 1e-8 * epsilon^(-1/3) * chi_t`.
    pub fn from_dissipation(
        epsilon: f64,
        chi_t: f64,
        tau: f64,
        eta: f64,
        z: f64,
        wavelength: f64,
    ) -> Result<Self> {
        if !(1e-10..=1e-1).contains(&epsilon) {
            return Err(Error::Config(format!(
                "epsilon must lie in [1e-10, 1e-1] m^2/s^3, got {epsilon}"
            )));
        }
        if !(1e-10..=1e-4).contains(&chi_t) {
            return Err(Error::Config(format!(
                "chi_t must lie in [1e-10, 1e-4] K^2/s, got {chi_t}"
            )));
        }
        let cn2 = 1e-8 * libm::cbrt(epsilon).recip() * chi_t;
        Self::checked(cn2, epsilon, chi_t, tau, eta, z, wavelength)
    }

    /// Build directly from `cn2`; `epsilon` is fixed at [`DEFAULT_EPSILON`] and
    /// `chi_t` is derived so the dissipation relation holds.
    pub fn from_cn2(cn2: f64, tau: f64, eta: f64, z: f64, wavelength: f64) -> Result<Self> {
        if !(cn2.is_finite() && cn2 >= 0.0) {
            return Err(Error::Config(format!(
                "cn2 must be non-negative, got {cn2}"
            )));
        }
        let epsilon = DEFAULT_EPSILON;
        let chi_t = cn2 * libm::cbrt(epsilon) * 1e8;
        Self::checked(cn2, epsilon, chi_t, tau, eta, z, wavelength)
    }

    /// `from_cn2` with default `tau`, `eta`, the 30 m channel and 633 nm light.
    pub fn with_cn2(cn2: f64) -> Result<Self> {
        Self::from_cn2(
            cn2,
            DEFAULT_TAU,
            DEFAULT_ETA,
            STANDARD_DISTANCE,
            DEFAULT_WAVELENGTH,
        )
    }

    fn checked(
        cn2: f64,
        epsilon: f64,
        chi_t: f64,
        tau: f64,
        eta: f64,
        z: f64,
        wavelength: f64,
    ) -> Result<Self> {
        if !(-5.0..0.0).contains(&tau) {
            return Err(Error::Config(format!("tau must lie in [-5, 0), got {tau}")));
        }
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::Config(format!(
                "inner scale must be positive, got {eta}"
            )));
        }
        if !(z.is_finite() && z > 0.0) {
            return Err(Error::Config(format!("distance must be positive, got {z}")));
        }
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::Config(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        Ok(Self {
            cn2,
            epsilon,
            chi_t,
            tau,
            eta,
            z,
            k0: 2.0 * PI / wavelength,
        })
    }

    pub fn cn2(&self) -> f64 {
        self.cn2
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn chi_t(&self) -> f64 {
        self.chi_t
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.k0
    }

    /// Same channel with a different propagation distance.
    pub fn with_distance(mut self, z: f64) -> Result<Self> {
        if !(z.is_finite() && z > 0.0) {
            return Err(Error::Config(format!("distance must be positive, got {z}")));
        }
        self.z = z;
        Ok(self)
    }

    /// Same channel at a different wavelength.
    pub fn with_wavelength(mut self, wavelength: f64) -> Result<Self> {
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::Config(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        self.k0 = 2.0 * PI / wavelength;
        Ok(self)
    }

    /// Refractive-index power spectrum `Phi_ot(kappa)`.
    pub fn index_spectrum(&self, kappa: f64) -> Result<f64> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::Domain(format!(
                "spectrum is singular at kappa <= 0 (got {kappa})"
            )));
        }
        Ok(self.index_spectrum_at(kappa))
    }

    /// Phase power spectrum `2 pi k0^2 z Phi_ot(kappa)`.
    pub fn phase_spectrum(&self, kappa: f64) -> Result<f64> {
        Ok(self.phase_scale() * self.index_spectrum(kappa)?)
    }

    fn phase_scale(&self) -> f64 {
        2.0 * PI * self.k0 * self.k0 * self.z
    }

    fn index_spectrum_at(&self, kappa: f64) -> f64 {
        let ke = kappa * self.eta;
        let ke_23 = libm::cbrt(ke * ke);
        let delta = 8.284 * ke_23 * ke_23 + 12.978 * ke * ke;
        let inv_tau = 1.0 / self.tau;
        let mix = libm::exp(-A_T * delta) - 2.0 * inv_tau * libm::exp(-A_TS * delta)
            + inv_tau * inv_tau * libm::exp(-A_S * delta);
        0.388 * self.cn2 * libm::pow(kappa, -11.0 / 3.0) * (1.0 + 2.35 * ke_23) * mix
    }
}

/// The four channel presets, weak to strong: `cn2` from 1e-15 to 1e-12, 30 m, 633 nm.
pub fn standard_levels() -> [TurbulenceParams; 4] {
    STANDARD_CN2.map(|cn2| TurbulenceParams::with_cn2(cn2).expect("preset parameters are valid"))
}

/// Deterministic noise source for screen synthesis (ChaCha20, seeded from a `u64`).
#[derive(Debug, Clone)]
pub struct ScreenRng {
    seed: u64,
    inner: ChaCha20Rng,
}

impl ScreenRng {
    pub const ALGORITHM: &'static str = "chacha20";

    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Circular complex Gaussian with zero mean and unit variance.
    pub fn complex_normal(&mut self) -> Complex64 {
        let re: f64 = StandardNormal.sample(&mut self.inner);
        let im: f64 = StandardNormal.sample(&mut self.inner);
        Complex64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
    }
}

/// Mixes a base seed and a sample index into an independent per-sample seed (SplitMix64).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Radial wavenumber of DFT bin `(row, col)`, rad/m.
fn bin_kappa(grid: &GridSpec, row: usize, col: usize) -> f64 {
    let dk = 2.0 * PI / grid.side();
    let kx = signed_index(col, grid.n()) as f64 * dk;
    let ky = signed_index(row, grid.n()) as f64 * dk;
    libm::sqrt(kx * kx + ky * ky)
}

/// Filtered noise in DFT order: `sqrt(2) * C * (2 pi / L) * sqrt(Phi(kappa))`, DC bin zero.
///
/// The extra `sqrt(2)` compensates for keeping only the real part of the transform.
pub fn screen_spectrum(
    params: &TurbulenceParams,
    grid: &GridSpec,
    rng: &mut ScreenRng,
) -> Vec<Complex64> {
    let n = grid.n();
    let dk = 2.0 * PI / grid.side();
    let scale = params.phase_scale();
    let mut spec = Vec::with_capacity(grid.len());
    for row in 0..n {
        for col in 0..n {
            let noise = rng.complex_normal();
            let kappa = bin_kappa(grid, row, col);
            let amp = if kappa == 0.0 {
                0.0
            } else {
                SQRT_2 * dk * libm::sqrt(scale * params.index_spectrum_at(kappa))
            };
            spec.push(noise * amp);
        }
    }
    spec
}

/// Random phase screen for `params` on `grid`, piston removed.
pub fn make_screen(params: &TurbulenceParams, grid: &GridSpec, rng: &mut ScreenRng) -> PhaseScreen {
    let mut spec = screen_spectrum(params, grid, rng);
    Fft2::new(grid.n()).forward(&mut spec);
    // The planned transform is unitary; the synthesis sum is the unnormalized DFT.
    let n = grid.n() as f64;
    let phase: Vec<f64> = spec.iter().map(|v| v.re * n).collect();
    PhaseScreen::new(*grid, phase)
        .expect("screen synthesis yields finite samples")
        .without_piston()
}

/// Expected per-pixel screen variance: the spectral sum `sum (2 pi / L)^2 Phi(kappa)`
/// over every nonzero DFT bin.
pub fn screen_variance(params: &TurbulenceParams, grid: &GridSpec) -> f64 {
    let n = grid.n();
    let dk = 2.0 * PI / grid.side();
    let scale = params.phase_scale();
    let mut total = 0.0;
    for row in 0..n {
        for col in 0..n {
            let kappa = bin_kappa(grid, row, col);
            if kappa > 0.0 {
                total += dk * dk * scale * params.index_spectrum_at(kappa);
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn level(cn2: f64) -> TurbulenceParams {
        TurbulenceParams::with_cn2(cn2).unwrap()
    }

    #[test]
    fn presets_follow_experiment() {
        let levels = standard_levels();
        assert_eq!(levels[0].cn2(), 1e-15);
        assert_eq!(levels[3].cn2(), 1e-12);
        assert!(levels.iter().all(|l| l.z() == 30.0));
        assert!(levels
            .iter()
            .all(|l| (l.wavelength() - 633e-9).abs() < 1e-20));
    }

    #[test]
    fn dissipation_relation() {
        let p = TurbulenceParams::from_dissipation(1e-5, 1e-7, -2.5, 1e-3, 30.0, 633e-9).unwrap();
        let expect = 1e-8 * (1e-5f64).powf(-1.0 / 3.0) * 1e-7;
        assert!((p.cn2() - expect).abs() / expect < 1e-12);
        let q = TurbulenceParams::with_cn2(p.cn2()).unwrap();
        assert!((q.chi_t() - 1e-7).abs() / 1e-7 < 1e-12);
    }

    #[test]
    fn parameter_ranges_are_enforced() {
        assert!(TurbulenceParams::from_dissipation(1.0, 1e-7, -2.5, 1e-3, 30.0, 633e-9).is_err());
        assert!(TurbulenceParams::from_dissipation(1e-5, 1e-3, -2.5, 1e-3, 30.0, 633e-9).is_err());
        assert!(TurbulenceParams::from_cn2(1e-13, 0.0, 1e-3, 30.0, 633e-9).is_err());
        assert!(TurbulenceParams::from_cn2(1e-13, -6.0, 1e-3, 30.0, 633e-9).is_err());
        assert!(TurbulenceParams::from_cn2(1e-13, -2.5, 0.0, 30.0, 633e-9).is_err());
        assert!(TurbulenceParams::from_cn2(1e-13, -2.5, 1e-3, -1.0, 633e-9).is_err());
        assert!(TurbulenceParams::from_cn2(-1e-13, -2.5, 1e-3, 30.0, 633e-9).is_err());
    }

    #[test]
    fn spectrum_scalings() {
        let a = level(1e-13);
        let b = level(2e-13);
        for kappa in [1.0, 50.0, 628.0, 1e4] {
            let (sa, sb) = (
                a.index_spectrum(kappa).unwrap(),
                b.index_spectrum(kappa).unwrap(),
            );
            assert!((sb / sa - 2.0).abs() < 1e-12);
            let z2 = a.with_distance(60.0).unwrap();
            let r = z2.phase_spectrum(kappa).unwrap() / a.phase_spectrum(kappa).unwrap();
            assert!((r - 2.0).abs() < 1e-12);
            let half = a.with_wavelength(633e-9 / 2.0).unwrap();
            let r = half.phase_spectrum(kappa).unwrap() / a.phase_spectrum(kappa).unwrap();
            assert!((r - 4.0).abs() < 1e-12);
        }
        assert!(a.index_spectrum(0.0).is_err());
        assert!(a.index_spectrum(-3.0).is_err());
        // Dissipation cutoff.
        let far = a.index_spectrum(1e7).unwrap() / a.index_spectrum(1e2).unwrap();
        assert!(far < 1e-20);
        assert!(a.index_spectrum(1e3).unwrap() > 0.0);
    }

    #[test]
    fn zero_strength_gives_flat_screen() {
        let g = GridSpec::desk(32).unwrap();
        let s = make_screen(&level(0.0), &g, &mut ScreenRng::new(9));
        assert!(s.phase().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn screens_are_deterministic_and_piston_free() {
        let g = GridSpec::desk(64).unwrap();
        let p = level(1e-12);
        let a = make_screen(&p, &g, &mut ScreenRng::new(42));
        let b = make_screen(&p, &g, &mut ScreenRng::new(42));
        assert_eq!(a, b);
        assert!(a.mean().abs() < 1e-12);
        let c = make_screen(&p, &g, &mut ScreenRng::new(43));
        assert_ne!(a, c);
    }

    #[test]
    fn derived_seeds_differ() {
        let s: Vec<u64> = (0..100).map(|i| derive_seed(7, i)).collect();
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                assert_ne!(s[i], s[j]);
            }
        }
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }
}
