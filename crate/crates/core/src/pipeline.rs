//! Distort, predict, conjugate, compensate, evaluate.
//!
//! A [`Scenario`] fixes the beam, turbulence level and observation distance;
//! everything else about a sample follows from its seed, so evaluation can
//! regenerate the complex fields that the dataset only stores as images.

use alloc::format;
use alloc::vec::Vec;

use crate::ddnn::{predict_screen, DiffractiveNetwork};
use crate::encoding::ScreenEncoding;
use crate::error::{Error, Result};
use crate::field::{make_vortex_beam, ComplexField, PhaseScreen};
use crate::grid::GridSpec;
use crate::image::Image;
use crate::metrics::{oam_spectrum, psnr};
use crate::propagation::PropagationKernel;
use crate::turbulence::{make_screen, ScreenRng, TurbulenceParams};

/// Distance from the turbulence screen to the recorded intensity, meters.
pub const DEFAULT_OBSERVATION_DISTANCE: f64 = 0.1;
pub const DEFAULT_ELL: i32 = -3;
pub const DEFAULT_WAIST: f64 = 3.5e-3;

#[derive(Clone, Debug)]
pub struct Scenario {
    params: TurbulenceParams,
    ell: i32,
    waist: f64,
    beam: ComplexField,
    observe: PropagationKernel,
}

impl Scenario {
    pub fn new(
        grid: GridSpec,
        params: TurbulenceParams,
        ell: i32,
        waist: f64,
        z_obs: f64,
    ) -> Result<Self> {
        if !(z_obs >= 0.0 && z_obs.is_finite()) {
            return Err(Error::Config(format!(
                "observation distance {z_obs} must be finite and >= 0"
            )));
        }
        let beam = make_vortex_beam(grid, ell, waist)?;
        let observe = PropagationKernel::new(grid, z_obs)?;
        Ok(Self {
            params,
            ell,
            waist,
            beam,
            observe,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        self.beam.grid()
    }

    pub fn params(&self) -> &TurbulenceParams {
        &self.params
    }

    pub fn ell(&self) -> i32 {
        self.ell
    }

    pub fn waist(&self) -> f64 {
        self.waist
    }

    pub fn z_obs(&self) -> f64 {
        self.observe.distance()
    }

    pub fn beam(&self) -> &ComplexField {
        &self.beam
    }

    pub fn simulate(&self, seed: u64) -> Result<Realization> {
        let screen = make_screen(&self.params, self.grid(), &mut ScreenRng::new(seed));
        let at_screen = self.beam.apply_phase(&screen)?;
        let received = self.observe.propagate(&at_screen)?;
        if !received.is_finite() {
            return Err(Error::Domain(format!(
                "non-finite field for seed {seed:#018x}"
            )));
        }
        let image = received.intensity().normalized().map_err(|_| {
            Error::Domain(format!("flat distorted intensity for seed {seed:#018x}"))
        })?;
        Ok(Realization {
            seed,
            screen,
            at_screen,
            received,
            image,
        })
    }
}

/// One turbulence draw and the fields it produces.
#[derive(Clone, Debug)]
pub struct Realization {
    pub seed: u64,
    pub screen: PhaseScreen,
    /// Beam just after the screen.
    pub at_screen: ComplexField,
    /// Beam at the observation plane.
    pub received: ComplexField,
    /// Normalized intensity of `received`.
    pub image: Image,
}

pub fn conjugate_screen(pred: &PhaseScreen) -> PhaseScreen {
    pred.negated()
}

pub fn compensate(distorted: &ComplexField, comp: &PhaseScreen) -> Result<ComplexField> {
    distorted.apply_phase(comp)
}

/// Source of the screen estimate used for compensation.
#[derive(Clone, Copy, Debug)]
pub enum Predictor<'a> {
    Network {
        net: &'a DiffractiveNetwork,
        encoding: ScreenEncoding,
    },
    /// Returns the true screen.
    Oracle,
    /// Returns a flat screen.
    Identity,
}

impl Predictor<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Predictor::Network { .. } => "network",
            Predictor::Oracle => "oracle",
            Predictor::Identity => "identity",
        }
    }

    pub fn predict(&self, sample: &Realization) -> Result<PhaseScreen> {
        match self {
            Predictor::Network { net, encoding } => {
                predict_screen(net, &sample.image, Some(encoding))
            }
            Predictor::Oracle => Ok(sample.screen.clone()),
            Predictor::Identity => Ok(PhaseScreen::zeros(*sample.screen.grid())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleOutcome {
    pub seed: u64,
    pub mp_distorted: f64,
    pub mp_compensated: f64,
    /// Ground-truth conjugate applied at the screen plane.
    pub mp_bound_screen: f64,
    /// Ground-truth conjugate applied at the observation plane.
    pub mp_bound_receiver: f64,
    /// Encoded prediction against the encoded ground truth.
    pub psnr: f64,
}

impl SampleOutcome {
    pub fn improved(&self) -> bool {
        self.mp_compensated > self.mp_distorted
    }
}

pub fn evaluate_realization(
    sample: &Realization,
    predicted: &PhaseScreen,
    encoding: &ScreenEncoding,
    ell: i32,
) -> Result<SampleOutcome> {
    let mp = |f: &ComplexField| oam_spectrum(f)?.mode_purity(ell);
    let gt_conj = conjugate_screen(&sample.screen);
    let comp = conjugate_screen(predicted);
    Ok(SampleOutcome {
        seed: sample.seed,
        mp_distorted: mp(&sample.received)?,
        mp_compensated: mp(&compensate(&sample.received, &comp)?)?,
        mp_bound_screen: mp(&compensate(&sample.at_screen, &gt_conj)?)?,
        mp_bound_receiver: mp(&compensate(&sample.received, &gt_conj)?)?,
        psnr: psnr(
            &encoding.encode(predicted),
            &encoding.encode(&sample.screen),
        )?,
    })
}

pub fn evaluate_seed(
    scenario: &Scenario,
    predictor: &Predictor<'_>,
    encoding: &ScreenEncoding,
    seed: u64,
) -> Result<SampleOutcome> {
    let sample = scenario.simulate(seed)?;
    let pred = predictor.predict(&sample)?;
    evaluate_realization(&sample, &pred, encoding, scenario.ell())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelSummary {
    pub count: usize,
    pub improved: usize,
    pub mean_mp_distorted: f64,
    pub mean_mp_compensated: f64,
    pub mean_mp_bound_screen: f64,
    pub mean_mp_bound_receiver: f64,
    /// Mean over finite values; infinite when every prediction was exact.
    pub mean_psnr: f64,
}

impl LevelSummary {
    pub fn improved_fraction(&self) -> f64 {
        self.improved as f64 / self.count as f64
    }
}

pub fn summarize(outcomes: &[SampleOutcome]) -> Result<LevelSummary> {
    if outcomes.is_empty() {
        return Err(Error::Precondition("no samples to summarize".into()));
    }
    let n = outcomes.len() as f64;
    let mean = |f: fn(&SampleOutcome) -> f64| outcomes.iter().map(f).sum::<f64>() / n;
    let finite: Vec<f64> = outcomes
        .iter()
        .map(|o| o.psnr)
        .filter(|p| p.is_finite())
        .collect();
    let mean_psnr = if finite.is_empty() {
        f64::INFINITY
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    };
    Ok(LevelSummary {
        count: outcomes.len(),
        improved: outcomes.iter().filter(|o| o.improved()).count(),
        mean_mp_distorted: mean(|o| o.mp_distorted),
        mean_mp_compensated: mean(|o| o.mp_compensated),
        mean_mp_bound_screen: mean(|o| o.mp_bound_screen),
        mean_mp_bound_receiver: mean(|o| o.mp_bound_receiver),
        mean_psnr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::turbulence::standard_levels;

    fn scenario(level: usize) -> Scenario {
        let g = GridSpec::desk(64).unwrap();
        Scenario::new(
            g,
            standard_levels()[level],
            DEFAULT_ELL,
            DEFAULT_WAIST,
            DEFAULT_OBSERVATION_DISTANCE,
        )
        .unwrap()
    }

    #[test]
    fn conjugate_twice_is_identity() {
        let s = scenario(1).simulate(3).unwrap();
        assert_eq!(conjugate_screen(&conjugate_screen(&s.screen)), s.screen);
        let z = PhaseScreen::zeros(*s.screen.grid());
        assert!(conjugate_screen(&z).phase().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn true_conjugate_at_screen_restores_beam() {
        let sc = scenario(3);
        let s = sc.simulate(9).unwrap();
        let back = compensate(&s.at_screen, &conjugate_screen(&s.screen)).unwrap();
        for (a, b) in back.values().iter().zip(sc.beam().values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn stubs() {
        let sc = scenario(2);
        let enc = ScreenEncoding::for_sigma(1.0).unwrap();
        let s = sc.simulate(4).unwrap();
        let id =
            evaluate_realization(&s, &Predictor::Identity.predict(&s).unwrap(), &enc, -3).unwrap();
        assert_eq!(id.mp_compensated, id.mp_distorted);
        let or =
            evaluate_realization(&s, &Predictor::Oracle.predict(&s).unwrap(), &enc, -3).unwrap();
        assert_eq!(or.mp_compensated, or.mp_bound_receiver);
        assert!(or.psnr.is_infinite());
        assert!((or.mp_bound_screen - 1.0).abs() < 1e-6);
    }

    #[test]
    fn summary_rejects_empty() {
        assert!(matches!(summarize(&[]), Err(Error::Precondition(_))));
    }
}
