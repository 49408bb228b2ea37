mod common;

use std::f64::consts::PI;

use common::{random_image, random_network, rng};
use vortex_ao_core::ddnn::{
    encode_input, loss_mse, predict_screen, train, train_with, AdamConfig, DiffractiveLayer,
    DiffractiveNetwork, Modulation, TrainConfig, TrainState,
};
use vortex_ao_core::{make_kernel, make_vortex_beam, propagate, Error, GridSpec, Image};

fn small_grid() -> GridSpec {
    GridSpec::new(16, 10e-6, 633e-9).unwrap()
}

#[test]
fn transparent_network_is_free_space() {
    let g = GridSpec::desk(32).unwrap();
    let net = DiffractiveNetwork::new(g, 5, 0.3, Modulation::Hybrid).unwrap();
    let beam = make_vortex_beam(g, -3, 3.5e-3).unwrap();
    let img = beam.intensity().normalized().unwrap();
    let u = encode_input(&img, g).unwrap();
    let out = net.forward(&u).unwrap().output;
    let free = propagate(&u, &make_kernel(g, net.depth()).unwrap()).unwrap();
    assert!((net.depth() - 1.8).abs() < 1e-12);
    let want = free.intensity().normalized().unwrap();
    for (a, b) in out.as_slice().iter().zip(want.as_slice()) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn single_lens_layer_focuses() {
    let g = GridSpec::new(64, 10e-6, 633e-9).unwrap();
    let f = 0.02;
    let k = g.k0();
    let n = g.n();
    let lens: Vec<f64> = (0..g.len())
        .map(|i| {
            let (x, y) = (g.coord(i % n), g.coord(i / n));
            -k * (x * x + y * y) / (2.0 * f)
        })
        .collect();
    let layer = DiffractiveLayer::new(Modulation::Phase, lens, vec![0.0; g.len()]).unwrap();
    let net = DiffractiveNetwork::from_layers(g, f, Modulation::Phase, vec![layer]).unwrap();
    let u = encode_input(&Image::filled(n, 1.0), g).unwrap();
    let peak_in = u.intensity().min_max().1;
    let fwd = net.forward(&u).unwrap();
    let out = fwd.tape.output_field().intensity();
    let (_, peak_out) = out.min_max();
    assert!(peak_out > 10.0 * peak_in, "{peak_out} vs {peak_in}");
    // brightest pixel is one of the four around the optical axis
    let arg = out
        .as_slice()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    let (r, c) = (arg / n, arg % n);
    assert!((n / 2 - 1..=n / 2).contains(&r) && (n / 2 - 1..=n / 2).contains(&c));
}

#[test]
fn phase_only_network_conserves_power_in_every_plane() {
    let g = small_grid();
    let mut r = rng(21);
    let mut net = DiffractiveNetwork::new(g, 4, 5e-4, Modulation::Phase).unwrap();
    net.randomize_phases(3, 3.0);
    let u = encode_input(&random_image(16, &mut r), g).unwrap();
    let tape = net.forward(&u).unwrap().tape;
    let planes = tape
        .incident()
        .iter()
        .chain(tape.transmitted())
        .chain([tape.output_field()]);
    for p in planes {
        assert!((p.power() - u.power()).abs() < 1e-10 * u.power());
    }
}

#[test]
fn encode_input_contracts() {
    let g = small_grid();
    let ones = encode_input(&Image::filled(16, 1.0), g).unwrap();
    let v0 = ones.values()[0];
    assert!(ones
        .values()
        .iter()
        .all(|v| (v - v0).norm() < 1e-15 && v.im == 0.0));
    let mut spot = Image::zeros(16);
    spot.as_mut_slice()[5 * 16 + 9] = 1.0;
    let u = encode_input(&spot, g).unwrap();
    assert!(u
        .values()
        .iter()
        .enumerate()
        .all(|(i, v)| (i == 5 * 16 + 9) == (v.norm() > 0.0)));
    assert!((u.power() - 1.0).abs() < 1e-12);
    assert!(matches!(
        encode_input(&Image::filled(16, 2.0), g),
        Err(Error::Domain(_))
    ));
    let ring = make_vortex_beam(GridSpec::desk(32).unwrap(), -3, 3.5e-3)
        .unwrap()
        .intensity()
        .normalized()
        .unwrap();
    let back = encode_input(&ring, GridSpec::desk(32).unwrap())
        .unwrap()
        .intensity()
        .normalized()
        .unwrap();
    for (a, b) in back.as_slice().iter().zip(ring.as_slice()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn loss_examples() {
    let mut r = rng(22);
    let (a, b) = (random_image(16, &mut r), random_image(16, &mut r));
    assert_eq!(loss_mse(&a, &a).unwrap(), 0.0);
    let shifted = Image::from_fn(16, |i, j| a.get(i, j) + 0.1);
    assert!((loss_mse(&shifted, &a).unwrap() - 0.01).abs() < 1e-12);
    let mut acc = 0.0;
    for i in 0..16 {
        for j in 0..16 {
            acc += (a.get(i, j) - b.get(i, j)).powi(2);
        }
    }
    assert!((loss_mse(&a, &b).unwrap() - acc / 256.0).abs() < 1e-12);
    assert!(loss_mse(&a, &Image::zeros(8)).is_err());
}

fn pair(seed: u64) -> (Image, Image) {
    let mut r = rng(seed);
    (random_image(16, &mut r), random_image(16, &mut r))
}

#[test]
fn overfits_a_single_pair() {
    let g = small_grid();
    let ring = make_vortex_beam(GridSpec::desk(16).unwrap(), -1, 3.5e-3)
        .unwrap()
        .intensity()
        .normalized()
        .unwrap();
    let target = Image::from_fn(16, |i, j| {
        0.5 + 0.5 * (PI * (i as f64 + 0.5 * j as f64) / 8.0).sin()
    })
    .normalized()
    .unwrap();
    let net = DiffractiveNetwork::new(g, 5, 5e-4, Modulation::Hybrid).unwrap();
    let data = vec![(ring, target)];
    let cfg = TrainConfig {
        epochs: 200,
        batch_size: 1,
        shuffle_seed: 0,
    };
    let (_, curve) = train(net, &data, &cfg, AdamConfig::default()).unwrap();
    let last = *curve.last().unwrap();
    assert!(last < 1e-3, "final loss {last}");
}

#[test]
fn training_is_deterministic_and_resumable() {
    let g = small_grid();
    let data: Vec<_> = (0..6).map(pair).collect();
    let net = DiffractiveNetwork::new(g, 2, 5e-4, Modulation::Hybrid).unwrap();
    let cfg = TrainConfig {
        epochs: 4,
        batch_size: 4,
        shuffle_seed: 9,
    };
    let (a, ca) = train(net.clone(), &data, &cfg, AdamConfig::default()).unwrap();
    let (b, cb) = train(net.clone(), &data, &cfg, AdamConfig::default()).unwrap();
    assert_eq!(ca, cb);
    assert_eq!(a.network().layers(), b.network().layers());

    let mut resumed = TrainState::new(net, AdamConfig::default());
    let half = TrainConfig { epochs: 2, ..cfg };
    let mut curve = train_with(&mut resumed, &data, &half, |_, _| Ok(())).unwrap();
    curve.extend(train_with(&mut resumed, &data, &half, |_, _| Ok(())).unwrap());
    assert_eq!(curve, ca);
    assert_eq!(resumed.network().layers(), a.network().layers());
    assert_eq!(resumed.epochs_completed(), 4);
}

#[test]
fn modes_freeze_their_parameters() {
    let g = small_grid();
    let data: Vec<_> = (0..4).map(pair).collect();
    let cfg = TrainConfig {
        epochs: 2,
        batch_size: 2,
        shuffle_seed: 1,
    };
    let mut r = rng(24);
    for mode in [Modulation::Phase, Modulation::Amplitude] {
        let net = random_network(g, 2, 5e-4, mode, &mut r);
        let (st, _) = train(net.clone(), &data, &cfg, AdamConfig::default()).unwrap();
        for (before, after) in net.layers().iter().zip(st.network().layers()) {
            match mode {
                Modulation::Phase => {
                    assert_eq!(before.log_amplitude(), after.log_amplitude());
                    assert_ne!(before.phase(), after.phase());
                }
                _ => {
                    assert_eq!(before.phase(), after.phase());
                    assert_ne!(before.log_amplitude(), after.log_amplitude());
                }
            }
        }
    }
}

#[test]
fn training_preconditions() {
    let g = small_grid();
    let net = DiffractiveNetwork::new(g, 1, 5e-4, Modulation::Hybrid).unwrap();
    let data = vec![pair(1)];
    let zero = TrainConfig {
        epochs: 0,
        ..TrainConfig::default()
    };
    assert!(matches!(
        train(net.clone(), &data, &zero, AdamConfig::default()),
        Err(Error::Precondition(_))
    ));
    let empty: Vec<(Image, Image)> = Vec::new();
    assert!(matches!(
        train(
            net.clone(),
            &empty,
            &TrainConfig::default(),
            AdamConfig::default()
        ),
        Err(Error::Precondition(_))
    ));
    let wrong = vec![(Image::zeros(8), Image::zeros(8))];
    assert!(train(
        net.clone(),
        &wrong,
        &TrainConfig::default(),
        AdamConfig::default()
    )
    .is_err());
    assert!(matches!(
        predict_screen(&net, &data[0].0, None),
        Err(Error::Config(_))
    ));
}
