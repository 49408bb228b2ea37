use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Smallest stored log-amplitude; keeps every amplitude strictly positive.
pub const MIN_LOG_AMPLITUDE: f64 = -30.0;

/// Which parts of the transmission coefficient are trainable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulation {
    Phase,
    Amplitude,
    Hybrid,
}

impl Modulation {
    pub fn trains_phase(self) -> bool {
        matches!(self, Self::Phase | Self::Hybrid)
    }

    pub fn trains_amplitude(self) -> bool {
        matches!(self, Self::Amplitude | Self::Hybrid)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Phase => "phase",
            Self::Amplitude => "amp",
            Self::Hybrid => "hybrid",
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Self::Phase => 0,
            Self::Amplitude => 1,
            Self::Hybrid => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Self::Phase),
            1 => Some(Self::Amplitude),
            2 => Some(Self::Hybrid),
            _ => None,
        }
    }
}

impl core::str::FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phase" => Ok(Self::Phase),
            "amp" | "amplitude" => Ok(Self::Amplitude),
            "hybrid" => Ok(Self::Hybrid),
            other => Err(Error::Config(alloc::format!(
                "unknown modulation `{other}`"
            ))),
        }
    }
}

/// One modulation plane: `t = exp(log_amplitude) * exp(i phase)` per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffractiveLayer {
    mode: Modulation,
    phase: Vec<f64>,
    log_amplitude: Vec<f64>,
}

impl DiffractiveLayer {
    /// Transparent layer (`t = 1`).
    pub fn transparent(mode: Modulation, len: usize) -> Self {
        Self {
            mode,
            phase: vec![0.0; len],
            log_amplitude: vec![0.0; len],
        }
    }

    pub fn new(mode: Modulation, phase: Vec<f64>, log_amplitude: Vec<f64>) -> Result<Self> {
        if phase.len() != log_amplitude.len() {
            return Err(Error::Dimension {
                expected: phase.len(),
                found: log_amplitude.len(),
            });
        }
        if phase.iter().chain(&log_amplitude).any(|v| !v.is_finite()) {
            return Err(Error::Domain("layer parameters must be finite".into()));
        }
        if log_amplitude.iter().any(|&a| a > 0.0) {
            return Err(Error::Domain(
                "layer amplitude exceeds one (log-amplitude > 0)".into(),
            ));
        }
        Ok(Self {
            mode,
            phase,
            log_amplitude,
        })
    }

    pub fn mode(&self) -> Modulation {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.phase.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phase.is_empty()
    }

    /// Unwrapped phase, radians.
    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    /// Phase reduced to `[0, 2 pi)`.
    pub fn wrapped_phase(&self) -> Vec<f64> {
        self.phase
            .iter()
            .map(|&p| {
                let r = libm::fmod(p, TAU);
                if r < 0.0 {
                    r + TAU
                } else {
                    r
                }
            })
            .collect()
    }

    pub fn log_amplitude(&self) -> &[f64] {
        &self.log_amplitude
    }

    pub fn amplitude(&self) -> Vec<f64> {
        self.log_amplitude.iter().map(|&a| libm::exp(a)).collect()
    }

    pub fn transmission(&self) -> Vec<Complex64> {
        self.phase
            .iter()
            .zip(&self.log_amplitude)
            .map(|(&p, &a)| Complex64::new(libm::cos(p), libm::sin(p)) * libm::exp(a))
            .collect()
    }

    pub(crate) fn phase_mut(&mut self) -> &mut [f64] {
        &mut self.phase
    }

    pub(crate) fn log_amplitude_mut(&mut self) -> &mut [f64] {
        &mut self.log_amplitude
    }

    /// Unchecked access for gradient probes; the caller keeps parameters finite.
    #[doc(hidden)]
    pub fn params_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.phase, &mut self.log_amplitude)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transparent_layer_is_identity() {
        let l = DiffractiveLayer::transparent(Modulation::Hybrid, 16);
        assert!(l
            .transmission()
            .iter()
            .all(|t| *t == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn rejects_gain_and_wraps_phase() {
        assert!(DiffractiveLayer::new(Modulation::Hybrid, vec![0.0; 2], vec![0.0, 0.1]).is_err());
        assert!(DiffractiveLayer::new(Modulation::Hybrid, vec![0.0; 2], vec![0.0]).is_err());
        let l = DiffractiveLayer::new(Modulation::Phase, vec![-0.5, 7.0], vec![0.0, -1.0]).unwrap();
        let w = l.wrapped_phase();
        assert!((w[0] - (TAU - 0.5)).abs() < 1e-12);
        assert!((w[1] - (7.0 - TAU)).abs() < 1e-12);
        assert!((l.amplitude()[1] - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("phase".parse::<Modulation>().unwrap(), Modulation::Phase);
        assert_eq!("amp".parse::<Modulation>().unwrap(), Modulation::Amplitude);
        assert_eq!("hybrid".parse::<Modulation>().unwrap(), Modulation::Hybrid);
        assert!("both".parse::<Modulation>().is_err());
        for m in [Modulation::Phase, Modulation::Amplitude, Modulation::Hybrid] {
            assert_eq!(Modulation::from_code(m.code()), Some(m));
        }
    }
}
