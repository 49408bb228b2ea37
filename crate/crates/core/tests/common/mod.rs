#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vortex_ao_core::ddnn::{encode_input, loss_mse, DiffractiveNetwork, Modulation};
use vortex_ao_core::{Complex64, ComplexField, GridSpec, Image};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_field(grid: GridSpec, rng: &mut impl Rng) -> ComplexField {
    let values = (0..grid.len())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    ComplexField::new(grid, values).unwrap()
}

pub fn random_image(n: usize, rng: &mut impl Rng) -> Image {
    Image::from_fn(n, |_, _| rng.random_range(0.0..1.0))
        .normalized()
        .unwrap()
}

/// Small network with random phases and log-amplitudes in `[-1, 0)`.
pub fn random_network(
    grid: GridSpec,
    layers: usize,
    spacing: f64,
    mode: Modulation,
    rng: &mut impl Rng,
) -> DiffractiveNetwork {
    let mut net = DiffractiveNetwork::new(grid, layers, spacing, mode).unwrap();
    for i in 0..layers {
        let (phase, log_amp) = net.layer_mut(i).params_mut();
        for p in phase.iter_mut() {
            *p = rng.random_range(-3.0..3.0);
        }
        for a in log_amp.iter_mut() {
            *a = rng.random_range(-1.0..-0.01);
        }
    }
    net
}

/// Loss evaluated directly, used as the finite-difference oracle.
pub fn loss_at(net: &DiffractiveNetwork, input: &Image, target: &Image) -> f64 {
    let u = encode_input(input, *net.grid()).unwrap();
    let out = net.forward(&u).unwrap().output;
    loss_mse(&out, target).unwrap()
}

/// Central difference of the loss with respect to one parameter.
pub fn central_difference(
    net: &DiffractiveNetwork,
    input: &Image,
    target: &Image,
    layer: usize,
    pixel: usize,
    amplitude: bool,
    step: f64,
) -> f64 {
    let mut probe = net.clone();
    let mut shift = |delta: f64| {
        let (phase, log_amp) = probe.layer_mut(layer).params_mut();
        if amplitude {
            log_amp[pixel] += delta;
        } else {
            phase[pixel] += delta;
        }
    };
    shift(step);
    let plus = loss_at(&probe, input, target);
    let mut shift = |delta: f64| {
        let (phase, log_amp) = probe.layer_mut(layer).params_mut();
        if amplitude {
            log_amp[pixel] += delta;
        } else {
            phase[pixel] += delta;
        }
    };
    shift(-2.0 * step);
    let minus = loss_at(&probe, input, target);
    (plus - minus) / (2.0 * step)
}
