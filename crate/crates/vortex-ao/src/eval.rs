//! Test-split evaluation of a predictor and sweeps over training checkpoints.
//!
//! Fields are regenerated from the sample seeds; the network sees the stored
//! (quantized) distorted image, exactly as in training.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use vortex_ao_core::pipeline::{
    compensate, conjugate_screen, evaluate_realization, summarize, LevelSummary, Predictor,
    SampleOutcome,
};
use vortex_ao_core::PropagationKernel;

use crate::checkpoint::Checkpoint;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::manifest::Split;
use crate::pgm;
use crate::report::{MetricRow, SweepRow};

#[derive(Debug, Clone)]
pub struct LevelReport {
    pub level: usize,
    pub epoch: u32,
    pub predictor: &'static str,
    pub rows: Vec<MetricRow>,
    pub summary: LevelSummary,
    /// Per-sample outcomes including both perfect-knowledge bounds, in id order.
    pub outcomes: Vec<SampleOutcome>,
}

/// Evaluates `predictor` on the test split of `level`.
///
/// With `dump`, writes four panels per sample: `{id}_gt.pgm` and
/// `{id}_pred.pgm` (encoded screens), `{id}_distorted.pgm` (the received
/// intensity) and `{id}_compensated.pgm`. Phase compensation leaves the
/// intensity in its own plane unchanged, so the compensated panel shows the
/// corrected beam after a further observation-distance leg.
pub fn evaluate_level(
    data: &Dataset,
    level: usize,
    predictor: &Predictor<'_>,
    epoch: u32,
    dump: Option<&Path>,
) -> Result<LevelReport> {
    let entry = data.manifest().level(level)?;
    let samples = data.load_level(level, Split::Test)?;
    if samples.is_empty() {
        return Err(Error::Invalid(format!(
            "level {level} has an empty test split"
        )));
    }
    let scen = data.scenario(level)?;
    let relay = match dump {
        Some(_) => Some(PropagationKernel::new(*scen.grid(), scen.z_obs())?),
        None => None,
    };
    let ell = data.manifest().ell;
    let outcomes: Vec<SampleOutcome> = samples
        .par_iter()
        .map(|s| {
            let run = || -> Result<SampleOutcome> {
                let mut real = scen.simulate(s.seed)?;
                real.image = s.distorted.clone();
                let pred = predictor.predict(&real)?;
                let out = evaluate_realization(&real, &pred, &entry.encoding, ell)?;
                if let (Some(dir), Some(relay)) = (dump, &relay) {
                    let corrected =
                        relay.propagate(&compensate(&real.received, &conjugate_screen(&pred))?)?;
                    let name = |tag: &str| dir.join(format!("{}_{tag}.pgm", s.id));
                    pgm::export_image(&s.target, &name("gt"))?;
                    pgm::export_image(&entry.encoding.encode(&pred), &name("pred"))?;
                    pgm::export_image(&s.distorted, &name("distorted"))?;
                    pgm::export_image(&corrected.intensity().normalized()?, &name("compensated"))?;
                }
                Ok(out)
            };
            run().map_err(|e| Error::Sample {
                id: s.id,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let rows = samples
        .iter()
        .zip(&outcomes)
        .map(|(s, o)| MetricRow {
            sample_id: s.id,
            level,
            mp_distorted: o.mp_distorted,
            mp_compensated: o.mp_compensated,
            psnr: o.psnr,
            epoch,
        })
        .collect();
    Ok(LevelReport {
        level,
        epoch,
        predictor: predictor.name(),
        rows,
        summary: summarize(&outcomes)?,
        outcomes,
    })
}

/// Loads a checkpoint, failing with the path when it is absent.
pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    if !path.is_file() {
        return Err(Error::Invalid(format!(
            "checkpoint {} does not exist",
            path.display()
        )));
    }
    Checkpoint::load(path)
}

/// Fails when `ck` decodes screens with a different range than `level` encodes them.
pub fn check_encoding(data: &Dataset, level: usize, ck: &Checkpoint, path: &Path) -> Result<()> {
    let enc = data.manifest().level(level)?.encoding;
    if ck.encoding != enc {
        return Err(Error::Invalid(format!(
            "{}: trained for screen range [{}, {}] but level {level} uses [{}, {}]",
            path.display(),
            ck.encoding.lo(),
            ck.encoding.hi(),
            enc.lo(),
            enc.hi()
        )));
    }
    Ok(())
}

/// One row per checkpoint, in the order given.
pub fn epoch_sweep(
    data: &Dataset,
    level: usize,
    checkpoints: &[PathBuf],
) -> Result<Vec<(SweepRow, LevelReport)>> {
    let loaded: Vec<Checkpoint> = checkpoints
        .iter()
        .map(|p| load_checkpoint(p))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(loaded.len());
    for (ck, path) in loaded.iter().zip(checkpoints) {
        check_encoding(data, level, ck, path)?;
        let predictor = Predictor::Network {
            net: ck.state.network(),
            encoding: ck.encoding,
        };
        let epoch = ck.state.epochs_completed();
        let rep = evaluate_level(data, level, &predictor, epoch, None)?;
        let s = rep.summary;
        out.push((
            SweepRow {
                epoch,
                mean_psnr: s.mean_psnr,
                mean_mp_distorted: s.mean_mp_distorted,
                mean_mp_compensated: s.mean_mp_compensated,
                improved_fraction: s.improved_fraction(),
            },
            rep,
        ));
    }
    Ok(out)
}
