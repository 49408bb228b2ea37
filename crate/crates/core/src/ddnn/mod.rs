//! Trainable diffractive deep neural network.
//!
//! A network is a stack of passive modulation layers separated by equal
//! free-space gaps: input plane, gap, layer 1, gap, ..., layer L, gap, output
//! plane. Gradients are exact: residuals are carried backwards with the adjoint
//! propagation operator.

mod adam;
mod layer;
mod network;
mod train;

pub use adam::{AdamConfig, Moments, TrainState};
pub use layer::{DiffractiveLayer, Modulation, MIN_LOG_AMPLITUDE};
pub use network::{
    encode_input, loss_mse, DiffractiveNetwork, Forward, Gradients, OutputScaling, Tape,
};
pub use train::{predict_screen, train, train_with, TrainConfig, TrainingSet};

/// Layers in the reference network.
pub const DEFAULT_LAYERS: usize = 5;

/// Gap between consecutive planes of the reference network, meters.
pub const DEFAULT_SPACING: f64 = 0.05;
