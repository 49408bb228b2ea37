//! Training runs with periodic checkpoints and a loss curve.

use std::path::{Path, PathBuf};

use vortex_ao_core::ddnn::{
    train_with, AdamConfig, DiffractiveNetwork, Modulation, OutputScaling, TrainConfig, TrainState,
    DEFAULT_LAYERS, DEFAULT_SPACING,
};

use crate::checkpoint::{epoch_file, Checkpoint};
use crate::dataset::{training_pairs, Dataset};
use crate::error::{Error, Result};
use crate::eval::{check_encoding, load_checkpoint};
use crate::manifest::Split;
use crate::report;

pub const LOSS_FILE: &str = "loss.csv";

#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub level: usize,
    /// Total epochs; a resumed run trains only the remainder.
    pub epochs: u32,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub mode: Modulation,
    pub scaling: OutputScaling,
    pub layers: usize,
    pub spacing: f64,
    pub checkpoint_every: u32,
    pub shuffle_seed: u64,
    pub resume: Option<PathBuf>,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            level: 3,
            epochs: 50,
            learning_rate: 0.01,
            batch_size: 32,
            mode: Modulation::Hybrid,
            scaling: OutputScaling::MinMax,
            layers: DEFAULT_LAYERS,
            spacing: DEFAULT_SPACING,
            checkpoint_every: 10,
            shuffle_seed: 0,
            resume: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub state: TrainState,
    /// `(epoch, mean training loss)` for every epoch so far.
    pub losses: Vec<(u32, f64)>,
    pub checkpoints: Vec<PathBuf>,
}

/// Trains on the training split of `opts.level`, writing
/// `epoch_NNN.ckpt` every `checkpoint_every` epochs (and after the last one)
/// plus `loss.csv` into `out`.
pub fn run(data: &Dataset, opts: &TrainOptions, out: &Path) -> Result<TrainOutcome> {
    if opts.epochs == 0 {
        return Err(Error::Invalid("epochs must be at least 1".into()));
    }
    if opts.checkpoint_every == 0 {
        return Err(Error::Invalid(
            "checkpoint interval must be at least 1".into(),
        ));
    }
    let entry = data.manifest().level(opts.level)?;
    let encoding = entry.encoding;
    let (mut state, mut losses) = match &opts.resume {
        Some(path) => {
            let ck = load_checkpoint(path)?;
            check_encoding(data, opts.level, &ck, path)?;
            if ck.level != opts.level {
                return Err(Error::Invalid(format!(
                    "{}: trained on level {}, not level {}",
                    path.display(),
                    ck.level,
                    opts.level
                )));
            }
            let done = ck.state.epochs_completed();
            let prior = match report::read_loss(&out.join(LOSS_FILE)) {
                Ok(rows) => rows.into_iter().filter(|(e, _)| *e <= done).collect(),
                Err(_) => Vec::new(),
            };
            let mut state = ck.state;
            state.set_learning_rate(opts.learning_rate);
            (state, prior)
        }
        None => {
            let net = DiffractiveNetwork::new(
                data.manifest().grid,
                opts.layers,
                opts.spacing,
                opts.mode,
            )?
            .with_scaling(opts.scaling);
            let adam = AdamConfig {
                learning_rate: opts.learning_rate,
                ..AdamConfig::default()
            };
            (TrainState::new(net, adam), Vec::new())
        }
    };
    let done = state.epochs_completed();
    if done >= opts.epochs {
        return Err(Error::Invalid(format!(
            "checkpoint already has {done} of {} epochs",
            opts.epochs
        )));
    }
    let pairs = training_pairs(&data.load_level(opts.level, Split::Train)?);
    let cfg = TrainConfig {
        epochs: (opts.epochs - done) as usize,
        batch_size: opts.batch_size,
        shuffle_seed: opts.shuffle_seed,
    };
    let mut checkpoints = Vec::new();
    let mut failure = None;
    let trained = train_with(&mut state, &pairs, &cfg, |s, loss| {
        let epoch = s.epochs_completed();
        losses.push((epoch, loss));
        if epoch % opts.checkpoint_every == 0 || epoch == opts.epochs {
            let path = out.join(epoch_file(epoch));
            if let Err(e) = (Checkpoint {
                state: s.clone(),
                level: opts.level,
                encoding,
            })
            .save(&path)
            {
                failure = Some(e);
                return Err(vortex_ao_core::Error::Precondition(
                    "checkpoint write failed".into(),
                ));
            }
            checkpoints.push(path);
        }
        Ok(())
    });
    if let Some(e) = failure {
        return Err(e);
    }
    trained?;
    report::write_loss(&out.join(LOSS_FILE), &losses)?;
    Ok(TrainOutcome {
        state,
        losses,
        checkpoints,
    })
}
