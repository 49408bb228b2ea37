use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::{AdamConfig, TrainState};
use super::network::{encode_input, loss_mse, DiffractiveNetwork, Gradients};
use crate::encoding::ScreenEncoding;
use crate::error::{Error, Result};
use crate::field::PhaseScreen;
use crate::image::Image;
use crate::turbulence::derive_seed;

/// Indexed collection of `(input image, target image)` pairs.
pub trait TrainingSet {
    fn len(&self) -> usize;
    fn input(&self, index: usize) -> &Image;
    fn target(&self, index: usize) -> &Image;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl TrainingSet for [(Image, Image)] {
    fn len(&self) -> usize {
        <[(Image, Image)]>::len(self)
    }

    fn input(&self, index: usize) -> &Image {
        &self[index].0
    }

    fn target(&self, index: usize) -> &Image {
        &self[index].1
    }
}

impl TrainingSet for Vec<(Image, Image)> {
    fn len(&self) -> usize {
        self.as_slice().len()
    }

    fn input(&self, index: usize) -> &Image {
        &self[index].0
    }

    fn target(&self, index: usize) -> &Image {
        &self[index].1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Seed of the per-epoch sample shuffle.
    pub shuffle_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            batch_size: 32,
            shuffle_seed: 0,
        }
    }
}

/// Trains a fresh optimizer state from `network` and returns it with the
/// per-epoch mean training loss.
pub fn train<D>(
    network: DiffractiveNetwork,
    data: &D,
    config: &TrainConfig,
    adam: AdamConfig,
) -> Result<(TrainState, Vec<f64>)>
where
    D: TrainingSet + Sync + ?Sized,
{
    let mut state = TrainState::new(network, adam);
    let curve = train_with(&mut state, data, config, |_, _| Ok(()))?;
    Ok((state, curve))
}

/// Continues training `state` for `config.epochs` more epochs, calling
/// `on_epoch(state, mean_loss)` after each one.
///
/// The shuffle of epoch `e` depends only on `shuffle_seed` and `e`, so a run
/// resumed from a checkpoint replays the same order as an uninterrupted one.
pub fn train_with<D, F>(
    state: &mut TrainState,
    data: &D,
    config: &TrainConfig,
    mut on_epoch: F,
) -> Result<Vec<f64>>
where
    D: TrainingSet + Sync + ?Sized,
    F: FnMut(&TrainState, f64) -> Result<()>,
{
    if config.epochs == 0 {
        return Err(Error::Precondition("epochs must be at least 1".into()));
    }
    if config.batch_size == 0 {
        return Err(Error::Precondition("batch size must be at least 1".into()));
    }
    if data.is_empty() {
        return Err(Error::Precondition("training set is empty".into()));
    }
    let n = state.network().grid().n();
    for i in 0..data.len() {
        if data.input(i).n() != n || data.target(i).n() != n {
            return Err(Error::Precondition(format!(
                "sample {i} does not match the {n}x{n} network grid"
            )));
        }
    }

    let mut curve = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..data.len()).collect();
    for _ in 0..config.epochs {
        let epoch = state.epochs_completed() as u64;
        order.sort_unstable();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(
            config.shuffle_seed,
            epoch,
        )));

        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            let (loss, mut grads) = batch_gradient(state.network(), data, batch)?;
            grads.scale(1.0 / batch.len() as f64);
            state.adam_step(&grads)?;
            total += loss;
        }
        let mean = total / data.len() as f64;
        if !mean.is_finite() {
            return Err(Error::Divergence(format!(
                "epoch {} loss is {mean}",
                epoch + 1
            )));
        }
        state.finish_epoch();
        curve.push(mean);
        on_epoch(state, mean)?;
    }
    Ok(curve)
}

fn sample_gradient<D>(net: &DiffractiveNetwork, data: &D, index: usize) -> Result<(f64, Gradients)>
where
    D: TrainingSet + ?Sized,
{
    let input = encode_input(data.input(index), *net.grid())?;
    let fwd = net.forward(&input)?;
    let loss = loss_mse(&fwd.output, data.target(index))?;
    let grads = net.backward(&fwd.tape, data.target(index))?;
    Ok((loss, grads))
}

/// Summed loss and gradient over `batch`; the reduction runs in batch order so
/// results do not depend on thread scheduling.
fn batch_gradient<D>(
    net: &DiffractiveNetwork,
    data: &D,
    batch: &[usize],
) -> Result<(f64, Gradients)>
where
    D: TrainingSet + Sync + ?Sized,
{
    #[cfg(feature = "std")]
    let parts: Vec<(f64, Gradients)> = {
        use rayon::prelude::*;
        batch
            .par_iter()
            .map(|&i| sample_gradient(net, data, i))
            .collect::<Result<_>>()?
    };
    #[cfg(not(feature = "std"))]
    let parts: Vec<(f64, Gradients)> = batch
        .iter()
        .map(|&i| sample_gradient(net, data, i))
        .collect::<Result<_>>()?;

    let mut total = Gradients::zeros_like(net);
    let mut loss = 0.0;
    for (l, g) in &parts {
        loss += l;
        total.accumulate(g);
    }
    Ok((loss, total))
}

/// Runs the network on a distorted-intensity image and decodes the output
/// grayscale back to radians.
pub fn predict_screen(
    net: &DiffractiveNetwork,
    distorted: &Image,
    encoding: Option<&ScreenEncoding>,
) -> Result<PhaseScreen> {
    let encoding = encoding.ok_or_else(|| {
        Error::Config("screen encoding range is required to decode predictions".into())
    })?;
    let input = encode_input(distorted, *net.grid())?;
    let out = net.forward(&input)?.output;
    let clipped = Image::new(
        out.n(),
        out.as_slice().iter().map(|v| v.clamp(0.0, 1.0)).collect(),
    )?;
    encoding.decode(&clipped, *net.grid())
}
