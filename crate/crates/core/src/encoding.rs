use alloc::format;

use crate::error::{Error, Result};
use crate::field::PhaseScreen;
use crate::grid::GridSpec;
use crate::image::Image;

/// Number of standard deviations covered on each side of zero by a level's encoding range.
pub const ENCODING_SIGMAS: f64 = 4.0;

/// Fixed linear map between phase (radians) and grayscale on `[0, 1]`:
/// `gray = (phi - lo) / (hi - lo)`, clipped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreenEncoding {
    lo: f64,
    hi: f64,
}

impl ScreenEncoding {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Config(format!(
                "invalid encoding range [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// `[-4 sigma, +4 sigma]` for a screen with standard deviation `sigma`.
    /// Falls back to `[-pi, pi]` when `sigma` is zero.
    pub fn for_sigma(sigma: f64) -> Result<Self> {
        let half = if sigma > 0.0 {
            ENCODING_SIGMAS * sigma
        } else {
            core::f64::consts::PI
        };
        Self::new(-half, half)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Phase step represented by one level of a 16-bit grayscale image.
    pub fn quantum(&self) -> f64 {
        (self.hi - self.lo) / 65535.0
    }

    pub fn encode(&self, screen: &PhaseScreen) -> Image {
        let span = self.hi - self.lo;
        let data = screen
            .phase()
            .iter()
            .map(|p| ((p - self.lo) / span).clamp(0.0, 1.0))
            .collect();
        Image::new(screen.grid().n(), data).expect("sizes agree")
    }

    pub fn decode(&self, image: &Image, grid: GridSpec) -> Result<PhaseScreen> {
        if image.n() != grid.n() {
            return Err(Error::Dimension {
                expected: grid.len(),
                found: image.len(),
            });
        }
        let span = self.hi - self.lo;
        PhaseScreen::new(
            grid,
            image
                .as_slice()
                .iter()
                .map(|g| self.lo + g * span)
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_within_range() {
        let g = GridSpec::desk(16).unwrap();
        let enc = ScreenEncoding::for_sigma(0.5).unwrap();
        assert_eq!((enc.lo(), enc.hi()), (-2.0, 2.0));
        let s =
            PhaseScreen::new(g, (0..256).map(|i| (i as f64 * 0.1).sin() * 1.9).collect()).unwrap();
        let back = enc.decode(&enc.encode(&s), g).unwrap();
        for (a, b) in back.phase().iter().zip(s.phase()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(ScreenEncoding::new(1.0, 1.0).is_err());
    }

    #[test]
    fn out_of_range_values_clip() {
        let g = GridSpec::desk(8).unwrap();
        let enc = ScreenEncoding::new(-1.0, 1.0).unwrap();
        let mut phase = alloc::vec![0.0; 64];
        phase[0] = 5.0;
        phase[1] = -5.0;
        let img = enc.encode(&PhaseScreen::new(g, phase).unwrap());
        assert_eq!(img.get(0, 0), 1.0);
        assert_eq!(img.get(0, 1), 0.0);
        assert_eq!(img.get(0, 2), 0.5);
    }
}
