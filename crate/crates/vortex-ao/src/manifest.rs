//! Dataset manifest: a flat key-value file written last, as the commit point
//! of a generated dataset.
//!
//! Keys:
//!
//! | key | meaning |
//! |---|---|
//! | `format` | always `vortex-ao-dataset` |
//! | `version` | manifest schema version |
//! | `grid.n`, `grid.dx`, `grid.wavelength` | sampling grid, meters |
//! | `beam.ell`, `beam.waist` | vortex charge and waist |
//! | `observation.model`, `observation.distance` | how intensities were recorded |
//! | `seed` | base seed; sample `id` uses `derive_seed(seed, id)` |
//! | `screen.rng` | noise generator of the screen synthesis |
//! | `level.{i}.cn2`, `.tau`, `.eta`, `.distance` | channel of level `i` |
//! | `level.{i}.encoding.lo`, `.encoding.hi` | screen grayscale range, radians |
//! | `level.{i}.first_id`, `.count`, `.train`, `.test` | global ids and split sizes |
//! | `file.{relative path}` | SHA-256 of each sample file |

use std::collections::BTreeMap;
use std::path::Path;

use vortex_ao_core::turbulence::ScreenRng;
use vortex_ao_core::{GridSpec, ScreenEncoding, TurbulenceParams};

use crate::error::{Error, Result};
use crate::keyvalue::{KeyValues, Writer};

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const FORMAT: &str = "vortex-ao-dataset";
pub const VERSION: u32 = 1;
/// Intensities are recorded after a free-space leg past the screen.
pub const OBSERVATION_MODEL: &str = "free-space";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split `{other}` (expected train or test)")),
        }
    }
}

/// Training share of `count` samples: five sixths, keeping both splits nonempty.
pub fn train_count(count: u64) -> u64 {
    (count * 5 / 6).clamp(1, count.saturating_sub(1).max(1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelEntry {
    /// Index into the standard presets, or the position in a custom list.
    pub index: usize,
    pub params: TurbulenceParams,
    pub encoding: ScreenEncoding,
    pub first_id: u64,
    pub count: u64,
    pub train: u64,
}

impl LevelEntry {
    pub fn test(&self) -> u64 {
        self.count - self.train
    }

    pub fn ids(&self, split: Split) -> std::ops::Range<u64> {
        let cut = self.first_id + self.train;
        match split {
            Split::Train => self.first_id..cut,
            Split::Test => cut..self.first_id + self.count,
        }
    }

    pub fn split_of(&self, id: u64) -> Split {
        if id < self.first_id + self.train {
            Split::Train
        } else {
            Split::Test
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub grid: GridSpec,
    pub ell: i32,
    pub waist: f64,
    pub z_obs: f64,
    pub seed: u64,
    pub levels: Vec<LevelEntry>,
    /// Relative sample path to lowercase hex SHA-256.
    pub hashes: BTreeMap<String, String>,
}

pub fn sample_path(split: Split, id: u64, target: bool) -> String {
    format!(
        "{}/{id}_{}.pgm",
        split.as_str(),
        if target { "y" } else { "x" }
    )
}

impl Manifest {
    pub fn level(&self, index: usize) -> Result<&LevelEntry> {
        self.levels
            .iter()
            .find(|l| l.index == index)
            .ok_or_else(|| Error::Invalid(format!("dataset has no level {index}")))
    }

    pub fn total(&self) -> u64 {
        self.levels.iter().map(|l| l.count).sum()
    }

    pub fn to_text(&self) -> String {
        let mut w = Writer::default();
        w.comment("vortex-ao dataset manifest")
            .put("format", FORMAT)
            .put("version", VERSION)
            .put("grid.n", self.grid.n())
            .float("grid.dx", self.grid.dx())
            .float("grid.wavelength", self.grid.wavelength())
            .put("beam.ell", self.ell)
            .float("beam.waist", self.waist)
            .put("observation.model", OBSERVATION_MODEL)
            .float("observation.distance", self.z_obs)
            .put("seed", self.seed)
            .put("screen.rng", ScreenRng::ALGORITHM)
            .put(
                "levels",
                self.levels
                    .iter()
                    .map(|l| l.index.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            );
        for l in &self.levels {
            let k = |s: &str| format!("level.{}.{s}", l.index);
            w.float(&k("cn2"), l.params.cn2())
                .float(&k("tau"), l.params.tau())
                .float(&k("eta"), l.params.eta())
                .float(&k("distance"), l.params.z())
                .float(&k("encoding.lo"), l.encoding.lo())
                .float(&k("encoding.hi"), l.encoding.hi())
                .put(&k("first_id"), l.first_id)
                .put(&k("count"), l.count)
                .put(&k("train"), l.train)
                .put(&k("test"), l.test());
        }
        for (path, hash) in &self.hashes {
            w.put(&format!("file.{path}"), hash);
        }
        w.finish()
    }

    pub fn parse(kv: &KeyValues) -> Result<Self> {
        let format: String = kv.require("format")?;
        if format != FORMAT {
            return Err(Error::Invalid(format!(
                "{}: not a dataset manifest (format `{format}`)",
                kv.path().display()
            )));
        }
        let version: u32 = kv.require("version")?;
        if version != VERSION {
            return Err(Error::Version {
                path: kv.path().into(),
                what: "manifest",
                found: version,
                expected: VERSION,
            });
        }
        let grid = GridSpec::new(
            kv.require("grid.n")?,
            kv.require("grid.dx")?,
            kv.require("grid.wavelength")?,
        )?;
        let model: String = kv.require("observation.model")?;
        if model != OBSERVATION_MODEL {
            return Err(Error::Invalid(format!(
                "unsupported observation model `{model}`"
            )));
        }
        let rng: String = kv.require("screen.rng")?;
        if rng != ScreenRng::ALGORITHM {
            return Err(Error::Invalid(format!(
                "unsupported screen generator `{rng}`"
            )));
        }
        let list: String = kv.require("levels")?;
        let mut levels = Vec::new();
        for item in list.split(',').filter(|s| !s.trim().is_empty()) {
            let index: usize = item
                .trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("bad level index `{item}` in manifest")))?;
            let k = |s: &str| format!("level.{index}.{s}");
            let params = TurbulenceParams::from_cn2(
                kv.require(&k("cn2"))?,
                kv.require(&k("tau"))?,
                kv.require(&k("eta"))?,
                kv.require(&k("distance"))?,
                grid.wavelength(),
            )?;
            let encoding = ScreenEncoding::new(
                kv.require(&k("encoding.lo"))?,
                kv.require(&k("encoding.hi"))?,
            )?;
            let count: u64 = kv.require(&k("count"))?;
            let train: u64 = kv.require(&k("train"))?;
            let test: u64 = kv.require(&k("test"))?;
            if train + test != count {
                return Err(Error::Invalid(format!(
                    "level {index}: train {train} + test {test} != count {count}"
                )));
            }
            levels.push(LevelEntry {
                index,
                params,
                encoding,
                first_id: kv.require(&k("first_id"))?,
                count,
                train,
            });
        }
        let hashes = kv
            .with_prefix("file.")
            .map(|(p, h)| (p.to_string(), h.to_string()))
            .collect();
        Ok(Self {
            grid,
            ell: kv.require("beam.ell")?,
            waist: kv.require("beam.waist")?,
            z_obs: kv.require("observation.distance")?,
            seed: kv.require("seed")?,
            levels,
            hashes,
        })
    }

    pub fn load(dir: &Path) -> Result<Self> {
        Self::parse(&KeyValues::load(&dir.join(MANIFEST_FILE))?)
    }
}
