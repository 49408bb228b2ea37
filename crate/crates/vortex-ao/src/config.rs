//! Optional run configuration: a flat key-value file using the manifest key
//! names where they overlap. Command-line flags take precedence.
//!
//! | key | used by |
//! |---|---|
//! | `grid.n`, `count`, `seed`, `levels` | gen-dataset |
//! | `beam.ell`, `beam.waist`, `observation.distance` | gen-dataset |
//! | `train.level`, `train.epochs`, `train.lr`, `train.batch` | train |
//! | `train.mode`, `train.scaling`, `train.layers`, `train.spacing` | train |
//! | `train.checkpoint_every`, `train.shuffle_seed` | train |
//! | `eval.level` | eval |

use std::path::Path;

use vortex_ao_core::ddnn::{Modulation, OutputScaling};

use crate::error::{Error, Result};
use crate::keyvalue::KeyValues;

const KNOWN: &[&str] = &[
    "grid.n",
    "count",
    "seed",
    "levels",
    "beam.ell",
    "beam.waist",
    "observation.distance",
    "train.level",
    "train.epochs",
    "train.lr",
    "train.batch",
    "train.mode",
    "train.scaling",
    "train.layers",
    "train.spacing",
    "train.checkpoint_every",
    "train.shuffle_seed",
    "eval.level",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    pub grid_n: Option<usize>,
    pub count: Option<u64>,
    pub seed: Option<u64>,
    pub levels: Option<Vec<usize>>,
    pub ell: Option<i32>,
    pub waist: Option<f64>,
    pub z_obs: Option<f64>,
    pub train_level: Option<usize>,
    pub epochs: Option<u32>,
    pub lr: Option<f64>,
    pub batch: Option<usize>,
    pub mode: Option<Modulation>,
    pub scaling: Option<OutputScaling>,
    pub layers: Option<usize>,
    pub spacing: Option<f64>,
    pub checkpoint_every: Option<u32>,
    pub shuffle_seed: Option<u64>,
    pub eval_level: Option<usize>,
}

pub fn parse_levels(s: &str) -> std::result::Result<Vec<usize>, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad level index `{t}`"))
        })
        .collect()
}

pub fn parse_scaling(s: &str) -> std::result::Result<OutputScaling, String> {
    match s {
        "minmax" => Ok(OutputScaling::MinMax),
        "power" => Ok(OutputScaling::PowerReferenced),
        other => Err(format!(
            "unknown output scaling `{other}` (expected minmax or power)"
        )),
    }
}

impl Config {
    pub fn parse(kv: &KeyValues) -> Result<Self> {
        kv.check_known(KNOWN)?;
        let bad = |key: &str, msg: String| {
            Error::Invalid(format!("{}: `{key}`: {msg}", kv.path().display()))
        };
        let levels = match kv.raw("levels") {
            Some(s) => Some(parse_levels(s).map_err(|m| bad("levels", m))?),
            None => None,
        };
        let mode = match kv.raw("train.mode") {
            Some(s) => Some(
                s.parse::<Modulation>()
                    .map_err(|e| bad("train.mode", e.to_string()))?,
            ),
            None => None,
        };
        let scaling = match kv.raw("train.scaling") {
            Some(s) => Some(parse_scaling(s).map_err(|m| bad("train.scaling", m))?),
            None => None,
        };
        Ok(Self {
            grid_n: kv.get("grid.n")?,
            count: kv.get("count")?,
            seed: kv.get("seed")?,
            levels,
            ell: kv.get("beam.ell")?,
            waist: kv.get("beam.waist")?,
            z_obs: kv.get("observation.distance")?,
            train_level: kv.get("train.level")?,
            epochs: kv.get("train.epochs")?,
            lr: kv.get("train.lr")?,
            batch: kv.get("train.batch")?,
            mode,
            scaling,
            layers: kv.get("train.layers")?,
            spacing: kv.get("train.spacing")?,
            checkpoint_every: kv.get("train.checkpoint_every")?,
            shuffle_seed: kv.get("train.shuffle_seed")?,
            eval_level: kv.get("eval.level")?,
        })
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::parse(&KeyValues::load(p)?),
            None => Ok(Self::default()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects_unknown_keys() {
        let kv = KeyValues::parse(
            "seed = 7\nlevels = 0, 3\ntrain.mode = phase\n",
            Path::new("c"),
        )
        .unwrap();
        let c = Config::parse(&kv).unwrap();
        assert_eq!(c.seed, Some(7));
        assert_eq!(c.levels, Some(vec![0, 3]));
        assert_eq!(c.mode, Some(Modulation::Phase));
        assert_eq!(c.epochs, None);
        let kv = KeyValues::parse("sed = 7\n", Path::new("c")).unwrap();
        assert!(Config::parse(&kv).is_err());
    }
}
