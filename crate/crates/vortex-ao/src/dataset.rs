//! Seeded generation and verified loading of screen/intensity datasets.
//!
//! Sample `id` (global across levels) draws its screen from
//! `derive_seed(seed, id)`. The distorted intensity is stored as `{id}_x.pgm`
//! and the encoded ground-truth screen as `{id}_y.pgm`.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use vortex_ao_core::grid::{DEFAULT_APERTURE, DEFAULT_WAVELENGTH};
use vortex_ao_core::metrics::oam_spectrum;
use vortex_ao_core::pipeline::{
    Scenario, DEFAULT_ELL, DEFAULT_OBSERVATION_DISTANCE, DEFAULT_WAIST,
};
use vortex_ao_core::turbulence::{derive_seed, screen_variance};
use vortex_ao_core::{standard_levels, GridSpec, Image, ScreenEncoding, TurbulenceParams};

use crate::error::{Error, Result};
use crate::fsutil;
use crate::manifest::{sample_path, train_count, LevelEntry, Manifest, Split, MANIFEST_FILE};
use crate::pgm;

pub const DESK_GRID: usize = 64;
pub const DESK_COUNT: u64 = 600;
pub const PAPER_GRID: usize = 256;
pub const PAPER_COUNT: u64 = 12_000;

#[derive(Debug, Clone)]
pub struct GenerateConfig {
    pub grid: GridSpec,
    pub ell: i32,
    pub waist: f64,
    pub z_obs: f64,
    pub seed: u64,
    pub count: u64,
    /// `(index, params)`; indices name levels in the manifest.
    pub levels: Vec<(usize, TurbulenceParams)>,
}

impl GenerateConfig {
    /// All four standard levels on an `n`-point grid over the default window.
    pub fn new(n: usize, count: u64, seed: u64) -> Result<Self> {
        Ok(Self {
            grid: GridSpec::with_side(n, DEFAULT_APERTURE, DEFAULT_WAVELENGTH)?,
            ell: DEFAULT_ELL,
            waist: DEFAULT_WAIST,
            z_obs: DEFAULT_OBSERVATION_DISTANCE,
            seed,
            count,
            levels: standard_levels().into_iter().enumerate().collect(),
        })
    }

    pub fn desk(seed: u64) -> Result<Self> {
        Self::new(DESK_GRID, DESK_COUNT, seed)
    }

    pub fn paper_scale(seed: u64) -> Result<Self> {
        Self::new(PAPER_GRID, PAPER_COUNT, seed)
    }

    /// Keeps only the listed standard-level indices, in the given order.
    pub fn select_levels(&mut self, indices: &[usize]) -> Result<()> {
        let all = standard_levels();
        let mut picked = Vec::with_capacity(indices.len());
        for &i in indices {
            let p = all.get(i).ok_or_else(|| {
                Error::Invalid(format!("level {i} out of range 0..{}", all.len()))
            })?;
            if picked.iter().any(|(j, _)| *j == i) {
                return Err(Error::Invalid(format!("level {i} listed twice")));
            }
            picked.push((i, *p));
        }
        if picked.is_empty() {
            return Err(Error::Invalid("no levels selected".into()));
        }
        self.levels = picked;
        Ok(())
    }
}

/// Per-level figures printed after generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelReport {
    pub index: usize,
    pub cn2: f64,
    /// Spectral-sum screen variance, rad².
    pub screen_variance: f64,
    pub mean_mp_distorted: f64,
}

pub fn scenario(manifest: &Manifest, level: &LevelEntry) -> Result<Scenario> {
    let params = level.params.with_wavelength(manifest.grid.wavelength())?;
    Ok(Scenario::new(
        manifest.grid,
        params,
        manifest.ell,
        manifest.waist,
        manifest.z_obs,
    )?)
}

/// Writes every sample file, then the manifest.
pub fn generate_dataset(cfg: &GenerateConfig, out: &Path) -> Result<(Manifest, Vec<LevelReport>)> {
    if cfg.count < 2 {
        return Err(Error::Invalid(format!(
            "count must be at least 2, got {}",
            cfg.count
        )));
    }
    let mut manifest = Manifest {
        grid: cfg.grid,
        ell: cfg.ell,
        waist: cfg.waist,
        z_obs: cfg.z_obs,
        seed: cfg.seed,
        levels: Vec::new(),
        hashes: Default::default(),
    };
    let mut first_id = 0;
    for &(index, params) in &cfg.levels {
        let params = params.with_wavelength(cfg.grid.wavelength())?;
        let sigma = screen_variance(&params, &cfg.grid).sqrt();
        manifest.levels.push(LevelEntry {
            index,
            params,
            encoding: ScreenEncoding::for_sigma(sigma)?,
            first_id,
            count: cfg.count,
            train: train_count(cfg.count),
        });
        first_id += cfg.count;
    }

    let mut reports = Vec::new();
    for level in &manifest.levels {
        let scen = scenario(&manifest, level)?;
        let written: Vec<Written> = (level.first_id..level.first_id + level.count)
            .into_par_iter()
            .map(|id| {
                write_sample(&scen, &manifest, level, id, out).map_err(|e| Error::Sample {
                    id,
                    source: Box::new(e),
                })
            })
            .collect::<Result<_>>()?;
        let mut mp = 0.0;
        for (_, files, m) in written {
            manifest.hashes.extend(files);
            mp += m;
        }
        reports.push(LevelReport {
            index: level.index,
            cn2: level.params.cn2(),
            screen_variance: screen_variance(&level.params, &cfg.grid),
            mean_mp_distorted: mp / level.count as f64,
        });
    }
    fsutil::write_atomic(&out.join(MANIFEST_FILE), manifest.to_text().as_bytes())?;
    Ok((manifest, reports))
}

/// Sample id, `(path, hash)` of both files, distorted mode purity.
type Written = (u64, [(String, String); 2], f64);

fn write_sample(
    scen: &Scenario,
    manifest: &Manifest,
    level: &LevelEntry,
    id: u64,
    out: &Path,
) -> Result<Written> {
    let sample = scen.simulate(derive_seed(manifest.seed, id))?;
    let mp = oam_spectrum(&sample.received)?.mode_purity(manifest.ell)?;
    let split = level.split_of(id);
    let mut files = [
        (String::new(), String::new()),
        (String::new(), String::new()),
    ];
    for (slot, (img, target)) in files.iter_mut().zip([
        (&sample.image, false),
        (&level.encoding.encode(&sample.screen), true),
    ]) {
        let rel = sample_path(split, id, target);
        let bytes = pgm::encode(img)?;
        fsutil::write_atomic(&out.join(&rel), &bytes)?;
        *slot = (rel, fsutil::sha256_hex(&bytes));
    }
    Ok((id, files, mp))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: u64,
    pub level: usize,
    pub seed: u64,
    pub distorted: Image,
    pub target: Image,
    pub encoding: ScreenEncoding,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    root: PathBuf,
    manifest: Manifest,
}

impl Dataset {
    pub fn open(root: &Path) -> Result<Self> {
        Ok(Self {
            root: root.to_path_buf(),
            manifest: Manifest::load(root)?,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn seed_of(&self, id: u64) -> u64 {
        derive_seed(self.manifest.seed, id)
    }

    pub fn scenario(&self, level: usize) -> Result<Scenario> {
        scenario(&self.manifest, self.manifest.level(level)?)
    }

    fn read_checked(&self, rel: &str) -> Result<Image> {
        let path = self.root.join(rel);
        let expected = self.manifest.hashes.get(rel).ok_or_else(|| {
            Error::Invalid(format!("{}: not listed in the manifest", path.display()))
        })?;
        let bytes = fsutil::read(&path)?;
        if fsutil::sha256_hex(&bytes) != *expected {
            return Err(Error::Corrupt { path });
        }
        pgm::decode(&bytes).map_err(|e| e.into_error(&path))
    }

    fn sample(&self, level: &LevelEntry, split: Split, id: u64) -> Result<Sample> {
        Ok(Sample {
            id,
            level: level.index,
            seed: self.seed_of(id),
            distorted: self.read_checked(&sample_path(split, id, false))?,
            target: self.read_checked(&sample_path(split, id, true))?,
            encoding: level.encoding,
        })
    }

    /// Samples of one level and split, ordered by id.
    pub fn load_level(&self, level: usize, split: Split) -> Result<Vec<Sample>> {
        let entry = self.manifest.level(level)?;
        entry
            .ids(split)
            .into_par_iter()
            .map(|id| self.sample(entry, split, id))
            .collect()
    }

    /// Samples of every level in one split, ordered by id.
    pub fn load_split(&self, split: Split) -> Result<Vec<Sample>> {
        let mut all = Vec::new();
        for level in &self.manifest.levels {
            all.extend(self.load_level(level.index, split)?);
        }
        all.sort_by_key(|s| s.id);
        Ok(all)
    }

    /// Checks every listed file against its hash.
    pub fn verify(&self) -> Result<()> {
        self.manifest.hashes.par_iter().try_for_each(|(rel, hash)| {
            let path = self.root.join(rel);
            if fsutil::sha256_hex(&fsutil::read(&path)?) != *hash {
                return Err(Error::Corrupt { path });
            }
            Ok(())
        })
    }
}

/// `(distorted, target)` pairs in the order given.
pub fn training_pairs(samples: &[Sample]) -> Vec<(Image, Image)> {
    samples
        .iter()
        .map(|s| (s.distorted.clone(), s.target.clone()))
        .collect()
}
