use vortex_ao::checkpoint::epoch_file;
use vortex_ao::dataset::{generate_dataset, Dataset, GenerateConfig};
use vortex_ao::eval::{epoch_sweep, evaluate_level};
use vortex_ao::train::{self, TrainOptions, LOSS_FILE};
use vortex_ao::{report, Error};
use vortex_ao_core::ddnn::Modulation;
use vortex_ao_core::pipeline::Predictor;

fn dataset(levels: &[usize], n: usize, count: u64, seed: u64) -> (tempfile::TempDir, Dataset) {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = GenerateConfig::new(n, count, seed).unwrap();
    cfg.select_levels(levels).unwrap();
    generate_dataset(&cfg, dir.path()).unwrap();
    let data = Dataset::open(dir.path()).unwrap();
    (dir, data)
}

#[test]
fn stubs_bracket_the_compensation() {
    let (_d, data) = dataset(&[0, 1, 2, 3], 64, 600, 4);
    let mut means = Vec::new();
    for level in 0..4 {
        let oracle = evaluate_level(&data, level, &Predictor::Oracle, 0, None).unwrap();
        let identity = evaluate_level(&data, level, &Predictor::Identity, 0, None).unwrap();
        assert_eq!(oracle.rows.len(), 100);
        let o = oracle.summary;
        assert_eq!(o.mean_mp_compensated, o.mean_mp_bound_receiver);
        // receiver-plane conjugation misses what diffracted over the observation
        // leg; at the strongest level that residual is 1.4e-3
        let gap = o.mean_mp_bound_screen - o.mean_mp_compensated;
        assert!(gap >= 0.0);
        assert!(
            gap < if level < 3 { 1e-3 } else { 2e-3 },
            "level {level}: {o:?}"
        );
        assert!(o.mean_psnr.is_infinite());
        for out in &oracle.outcomes {
            assert!((out.mp_bound_screen - 1.0).abs() < 1e-6);
            assert_eq!(out.mp_compensated, out.mp_bound_receiver);
        }
        for (row, out) in identity.rows.iter().zip(&identity.outcomes) {
            assert_eq!(row.mp_compensated, row.mp_distorted);
            assert!(!out.improved());
        }
        means.push(identity.summary.mean_mp_distorted);
    }
    assert!(means.windows(2).all(|w| w[0] > w[1]), "{means:?}");
}

#[test]
fn empty_or_missing_inputs_are_errors() {
    let (_d, data) = dataset(&[2], 16, 2, 1);
    assert!(evaluate_level(&data, 0, &Predictor::Identity, 0, None).is_err());
    let missing = std::path::PathBuf::from("/nonexistent/epoch_010.ckpt");
    let err = epoch_sweep(&data, 2, &[missing]).unwrap_err();
    assert!(err.to_string().contains("does not exist"), "{err}");
}

#[test]
fn training_writes_checkpoints_and_resumes_identically() {
    let (_d, data) = dataset(&[3], 16, 12, 6);
    let out = tempfile::tempdir().unwrap();
    let opts = TrainOptions {
        epochs: 6,
        batch_size: 4,
        checkpoint_every: 3,
        shuffle_seed: 2,
        ..TrainOptions::default()
    };
    let full = train::run(&data, &opts, out.path()).unwrap();
    assert_eq!(full.checkpoints.len(), 2);
    let losses = report::read_loss(&out.path().join(LOSS_FILE)).unwrap();
    assert_eq!(losses.len(), 6);
    assert!(losses.iter().all(|(_, l)| l.is_finite() && *l > 0.0));
    assert_eq!(losses, full.losses);

    let again = tempfile::tempdir().unwrap();
    std::fs::copy(out.path().join(LOSS_FILE), again.path().join(LOSS_FILE)).unwrap();
    let resumed = train::run(
        &data,
        &TrainOptions {
            resume: Some(out.path().join(epoch_file(3))),
            ..opts.clone()
        },
        again.path(),
    )
    .unwrap();
    assert_eq!(resumed.losses, full.losses);
    assert_eq!(
        std::fs::read(again.path().join(epoch_file(6))).unwrap(),
        std::fs::read(out.path().join(epoch_file(6))).unwrap()
    );

    let bad = TrainOptions {
        resume: Some(out.path().join("epoch_999.ckpt")),
        ..opts.clone()
    };
    let err = train::run(&data, &bad, again.path()).unwrap_err();
    assert!(
        matches!(err, Error::Invalid(ref m) if m.contains("does not exist")),
        "{err}"
    );

    let sweep = epoch_sweep(&data, 3, &full.checkpoints).unwrap();
    assert_eq!(
        sweep.iter().map(|(r, _)| r.epoch).collect::<Vec<_>>(),
        [3, 6]
    );
    assert!(sweep.iter().all(|(r, _)| r.mean_psnr.is_finite()));
}

#[test]
fn phase_mode_keeps_unit_amplitude() {
    let (_d, data) = dataset(&[1], 16, 6, 8);
    let out = tempfile::tempdir().unwrap();
    let opts = TrainOptions {
        level: 1,
        epochs: 2,
        batch_size: 2,
        mode: Modulation::Phase,
        ..TrainOptions::default()
    };
    let run = train::run(&data, &opts, out.path()).unwrap();
    let ck = vortex_ao::Checkpoint::load(run.checkpoints.last().unwrap()).unwrap();
    assert_eq!(ck.state.network().mode(), Modulation::Phase);
    assert!(ck
        .state
        .network()
        .layers()
        .iter()
        .all(|l| l.log_amplitude().iter().all(|&v| v == 0.0)));
    assert!(ck
        .state
        .network()
        .layers()
        .iter()
        .any(|l| l.phase().iter().any(|&v| v != 0.0)));
}
