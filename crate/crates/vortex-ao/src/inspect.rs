//! Single-artifact renders for debugging and figures.

use std::collections::BTreeMap;
use std::path::Path;

use vortex_ao_core::grid::{DEFAULT_APERTURE, DEFAULT_WAVELENGTH};
use vortex_ao_core::metrics::oam_spectrum;
use vortex_ao_core::pipeline::{DEFAULT_ELL, DEFAULT_WAIST};
use vortex_ao_core::turbulence::{DEFAULT_ETA, DEFAULT_TAU, STANDARD_CN2, STANDARD_DISTANCE};
use vortex_ao_core::{
    make_screen, make_vortex_beam, GridSpec, Image, PropagationKernel, ScreenRng, TurbulenceParams,
};

use crate::error::{Error, Result};
use crate::{fsutil, pgm};

/// `key=value` arguments with typed access; every key must be consumed.
#[derive(Debug, Default)]
pub struct Params(BTreeMap<String, String>);

impl Params {
    pub fn parse(items: &[String]) -> std::result::Result<Self, String> {
        let mut map = BTreeMap::new();
        for item in items {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got `{item}`"))?;
            if map
                .insert(k.trim().to_string(), v.trim().to_string())
                .is_some()
            {
                return Err(format!("parameter `{k}` given twice"));
            }
        }
        Ok(Self(map))
    }

    fn take<T: std::str::FromStr>(
        &mut self,
        key: &str,
        default: T,
    ) -> std::result::Result<T, String> {
        match self.0.remove(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| format!("bad value `{v}` for `{key}`")),
        }
    }

    fn take_opt(&mut self, key: &str) -> Option<String> {
        self.0.remove(key)
    }

    fn finish(self) -> std::result::Result<(), String> {
        match self.0.keys().next() {
            None => Ok(()),
            Some(k) => Err(format!("unknown parameter `{k}`")),
        }
    }
}

/// What to render. Parameter errors are usage errors.
#[derive(Debug, Clone, PartialEq)]
pub enum Artifact {
    /// Min-max scaled screen; a flat screen renders black.
    Screen {
        grid: GridSpec,
        params: TurbulenceParams,
        seed: u64,
    },
    /// Normalized intensity after `distance` of free space, with an optional
    /// OAM spectrum CSV (`ell,weight`).
    Beam {
        grid: GridSpec,
        ell: i32,
        waist: f64,
        distance: f64,
        spectrum: Option<String>,
    },
    /// Transfer-function phase wrapped to `[0, 1)`, centered frequencies.
    Kernel { grid: GridSpec, distance: f64 },
}

fn grid(p: &mut Params) -> std::result::Result<GridSpec, String> {
    let n = p.take("n", 64usize)?;
    let side = p.take("side", DEFAULT_APERTURE)?;
    GridSpec::with_side(n, side, p.take("wavelength", DEFAULT_WAVELENGTH)?)
        .map_err(|e| e.to_string())
}

impl Artifact {
    pub fn screen(mut p: Params) -> std::result::Result<Self, String> {
        let grid = grid(&mut p)?;
        let level: Option<usize> = match p.take_opt("level") {
            Some(v) => Some(
                v.parse()
                    .map_err(|_| format!("bad value `{v}` for `level`"))?,
            ),
            None => None,
        };
        let default_cn2 = match level {
            Some(i) => *STANDARD_CN2
                .get(i)
                .ok_or_else(|| format!("level {i} out of range"))?,
            None => STANDARD_CN2[3],
        };
        let params = TurbulenceParams::from_cn2(
            p.take("cn2", default_cn2)?,
            p.take("tau", DEFAULT_TAU)?,
            p.take("eta", DEFAULT_ETA)?,
            p.take("distance", STANDARD_DISTANCE)?,
            grid.wavelength(),
        )
        .map_err(|e| e.to_string())?;
        let seed = p.take("seed", 0u64)?;
        p.finish()?;
        Ok(Self::Screen { grid, params, seed })
    }

    pub fn beam(mut p: Params) -> std::result::Result<Self, String> {
        let grid = grid(&mut p)?;
        let ell = p.take("ell", DEFAULT_ELL)?;
        let waist = p.take("waist", DEFAULT_WAIST)?;
        let distance = p.take("distance", 0.0)?;
        let spectrum = p.take_opt("spectrum");
        p.finish()?;
        Ok(Self::Beam {
            grid,
            ell,
            waist,
            distance,
            spectrum,
        })
    }

    pub fn kernel(mut p: Params) -> std::result::Result<Self, String> {
        let grid = grid(&mut p)?;
        let distance = p.take("distance", 0.05)?;
        p.finish()?;
        Ok(Self::Kernel { grid, distance })
    }

    /// Writes the PGM to `out` (and the spectrum CSV when requested).
    pub fn render(&self, out: &Path) -> Result<()> {
        let img = match self {
            Self::Screen { grid, params, seed } => {
                let s = make_screen(params, grid, &mut ScreenRng::new(*seed)).as_image();
                s.normalized().unwrap_or_else(|_| Image::zeros(grid.n()))
            }
            Self::Beam {
                grid,
                ell,
                waist,
                distance,
                spectrum,
            } => {
                let mut f = make_vortex_beam(*grid, *ell, *waist)?;
                if *distance != 0.0 {
                    f = PropagationKernel::new(*grid, *distance)?.propagate(&f)?;
                }
                if let Some(path) = spectrum {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["ell", "weight"])?;
                    for (l, v) in oam_spectrum(&f)?.iter() {
                        w.write_record([l.to_string(), format!("{v:?}")])?;
                    }
                    fsutil::write_atomic(
                        Path::new(path),
                        &w.into_inner()
                            .map_err(|e| csv::Error::from(e.into_error()))?,
                    )?;
                }
                f.intensity().normalized()?
            }
            Self::Kernel { grid, distance } => {
                let k = PropagationKernel::new(*grid, *distance)?;
                let n = grid.n();
                let tau = std::f64::consts::TAU;
                Image::from_fn(n, |r, c| {
                    let h = k.transfer()[((r + n / 2) % n) * n + (c + n / 2) % n];
                    h.arg().rem_euclid(tau) / tau
                })
            }
        };
        if !img.is_unit_range() {
            return Err(Error::Invalid("rendered image left [0, 1]".into()));
        }
        pgm::export_image(&img, out)
    }
}
