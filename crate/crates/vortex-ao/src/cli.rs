//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime error, 2 usage error.
//! `VORTEX_AO_THREADS` sets the worker-thread count.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};
use vortex_ao_core::ddnn::{Modulation, OutputScaling};
use vortex_ao_core::pipeline::Predictor;

use crate::checkpoint::Checkpoint;
use crate::config::{parse_scaling, Config};
use crate::dataset::{
    generate_dataset, Dataset, GenerateConfig, DESK_COUNT, DESK_GRID, PAPER_COUNT, PAPER_GRID,
};
use crate::error::Error;
use crate::eval::{check_encoding, evaluate_level, load_checkpoint, LevelReport};
use crate::inspect::{Artifact, Params};
use crate::report::{self, SweepRow};
use crate::train::{self, TrainOptions};

pub const THREADS_ENV: &str = "VORTEX_AO_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "vortex-ao",
    version,
    about = "Diffractive-network adaptive optics for vortex beams in oceanic turbulence"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a seeded screen/intensity dataset.
    GenDataset(GenArgs),
    /// Train a diffractive network on one turbulence level.
    Train(TrainArgs),
    /// Evaluate checkpoints or stub predictors on a test split.
    Eval(EvalArgs),
    /// Render a single screen, beam or propagation kernel.
    Inspect(InspectArgs),
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("scale").args(["desk", "paper_scale"])))]
pub struct GenArgs {
    /// Key-value configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated standard level indices (0 weakest .. 3 strongest).
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<usize>>,
    /// Samples per level.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub count: Option<u64>,
    /// Grid points per side.
    #[arg(long)]
    pub grid: Option<usize>,
    /// 64x64 grid, 600 samples per level (the default).
    #[arg(long)]
    pub desk: bool,
    /// 256x256 grid, 12000 samples per level.
    #[arg(long)]
    pub paper_scale: bool,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub level: Option<usize>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub epochs: Option<u32>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub batch: Option<u64>,
    /// phase, amp or hybrid.
    #[arg(long, value_parser = |s: &str| s.parse::<Modulation>().map_err(|e| e.to_string()))]
    pub mode: Option<Modulation>,
    /// minmax or power.
    #[arg(long, value_parser = parse_scaling)]
    pub scaling: Option<OutputScaling>,
    #[arg(long)]
    pub layers: Option<usize>,
    /// Gap between planes, meters.
    #[arg(long)]
    pub spacing: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub checkpoint_every: Option<u32>,
    /// Shuffle seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Continue from this checkpoint up to `--epochs` total.
    #[arg(long)]
    pub resume: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("predictor").required(true).args(["checkpoint", "oracle_stub", "identity_stub"])))]
pub struct EvalArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: PathBuf,
    /// One or more checkpoints; several form an epoch sweep.
    #[arg(long, num_args = 1..)]
    pub checkpoint: Vec<PathBuf>,
    /// Predict the ground-truth screen.
    #[arg(long)]
    pub oracle_stub: bool,
    /// Predict a flat screen.
    #[arg(long)]
    pub identity_stub: bool,
    /// Level to evaluate; defaults to the checkpoint's level, or 3 for stubs.
    #[arg(long)]
    pub level: Option<usize>,
    /// Per-sample metrics CSV.
    #[arg(long, default_value = "report.csv")]
    pub report: PathBuf,
    /// Per-predictor summary CSV.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Epoch-sweep CSV (one row per checkpoint).
    #[arg(long)]
    pub sweep: Option<PathBuf>,
    /// Directory for four PGM panels per sample.
    #[arg(long)]
    pub dump_images: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("what").required(true).args(["screen", "beam", "kernel"])))]
pub struct InspectArgs {
    /// Phase screen. Params: n, side, wavelength, level, cn2, tau, eta, distance, seed.
    #[arg(long)]
    pub screen: bool,
    /// Beam intensity. Params: n, side, wavelength, ell, waist, distance, spectrum=<csv>.
    #[arg(long)]
    pub beam: bool,
    /// Transfer-function phase. Params: n, side, wavelength, distance.
    #[arg(long)]
    pub kernel: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// key=value parameters.
    pub params: Vec<String>,
}

pub enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn init_threads() -> Outcome {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            Failure::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))
        })?;
        // A pool may already exist when called twice in one process; the first setting wins.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}

fn gen_dataset(a: GenArgs) -> Outcome {
    let file = Config::load(a.config.as_deref())?;
    let (n, count) = if a.paper_scale {
        (PAPER_GRID, PAPER_COUNT)
    } else {
        (DESK_GRID, DESK_COUNT)
    };
    let count = a.count.or(file.count).unwrap_or(count);
    if count < 2 {
        return Err(Failure::Usage(format!(
            "count must be at least 2, got {count}"
        )));
    }
    let mut cfg = GenerateConfig::new(
        a.grid.or(file.grid_n).unwrap_or(n),
        count,
        a.seed.or(file.seed).unwrap_or(0),
    )?;
    if let Some(levels) = a.levels.or(file.levels) {
        cfg.select_levels(&levels)?;
    }
    cfg.ell = file.ell.unwrap_or(cfg.ell);
    cfg.waist = file.waist.unwrap_or(cfg.waist);
    cfg.z_obs = file.z_obs.unwrap_or(cfg.z_obs);
    let (manifest, reports) = generate_dataset(&cfg, &a.out)?;
    println!(
        "wrote {} samples ({}x{}) to {}",
        manifest.total(),
        manifest.grid.n(),
        manifest.grid.n(),
        a.out.display()
    );
    println!("level  cn2        screen_var_rad2  mean_mp_distorted");
    for r in reports {
        println!(
            "{:<6} {:<10.1e} {:<16.6} {:.6}",
            r.index, r.cn2, r.screen_variance, r.mean_mp_distorted
        );
    }
    Ok(())
}

fn train_cmd(a: TrainArgs) -> Outcome {
    let file = Config::load(a.config.as_deref())?;
    let d = TrainOptions::default();
    let opts = TrainOptions {
        level: a.level.or(file.train_level).unwrap_or(d.level),
        epochs: a.epochs.or(file.epochs).unwrap_or(d.epochs),
        learning_rate: a.lr.or(file.lr).unwrap_or(d.learning_rate),
        batch_size: a
            .batch
            .map(|b| b as usize)
            .or(file.batch)
            .unwrap_or(d.batch_size),
        mode: a.mode.or(file.mode).unwrap_or(d.mode),
        scaling: a.scaling.or(file.scaling).unwrap_or(d.scaling),
        layers: a.layers.or(file.layers).unwrap_or(d.layers),
        spacing: a.spacing.or(file.spacing).unwrap_or(d.spacing),
        checkpoint_every: a
            .checkpoint_every
            .or(file.checkpoint_every)
            .unwrap_or(d.checkpoint_every),
        shuffle_seed: a.seed.or(file.shuffle_seed).unwrap_or(d.shuffle_seed),
        resume: a.resume,
    };
    let data = Dataset::open(&a.data)?;
    let out = train::run(&data, &opts, &a.out)?;
    for (e, l) in &out.losses {
        println!("epoch {e:>4}  loss {l:.6e}");
    }
    for p in &out.checkpoints {
        println!("checkpoint {}", p.display());
    }
    Ok(())
}

fn eval_cmd(a: EvalArgs) -> Outcome {
    let file = Config::load(a.config.as_deref())?;
    let data = Dataset::open(&a.data)?;
    let level_arg = a.level.or(file.eval_level);
    let mut reports: Vec<LevelReport> = Vec::new();
    let mut sweep = Vec::new();
    if a.checkpoint.is_empty() {
        let predictor = if a.oracle_stub {
            Predictor::Oracle
        } else {
            Predictor::Identity
        };
        reports.push(evaluate_level(
            &data,
            level_arg.unwrap_or(3),
            &predictor,
            0,
            a.dump_images.as_deref(),
        )?);
    } else {
        let loaded: Vec<Checkpoint> = a
            .checkpoint
            .iter()
            .map(|p| load_checkpoint(p))
            .collect::<Result<_, _>>()?;
        for (ck, path) in loaded.iter().zip(&a.checkpoint) {
            let level = level_arg.unwrap_or(ck.level);
            check_encoding(&data, level, ck, path)?;
            let epoch = ck.state.epochs_completed();
            let dump = a.dump_images.as_ref().map(|d| {
                if loaded.len() > 1 {
                    d.join(format!("epoch_{epoch:03}"))
                } else {
                    d.clone()
                }
            });
            let predictor = Predictor::Network {
                net: ck.state.network(),
                encoding: ck.encoding,
            };
            let rep = evaluate_level(&data, level, &predictor, epoch, dump.as_deref())?;
            let s = rep.summary;
            sweep.push(SweepRow {
                epoch,
                mean_psnr: s.mean_psnr,
                mean_mp_distorted: s.mean_mp_distorted,
                mean_mp_compensated: s.mean_mp_compensated,
                improved_fraction: s.improved_fraction(),
            });
            reports.push(rep);
        }
    }
    let rows: Vec<_> = reports
        .iter()
        .flat_map(|r| r.rows.iter().copied())
        .collect();
    report::write_metrics(&a.report, &rows)?;
    let summary: Vec<_> = reports
        .iter()
        .map(|r| (r.level, r.epoch, r.predictor, r.summary))
        .collect();
    if let Some(p) = &a.summary {
        report::write_summary(p, &summary)?;
    }
    if let Some(p) = &a.sweep {
        report::write_sweep(p, &sweep)?;
    }
    println!("level epoch predictor  n    improved  mp_distorted  mp_compensated  bound_screen  bound_receiver  psnr_db");
    for (level, epoch, name, s) in summary {
        println!(
            "{level:<5} {epoch:<5} {name:<10} {:<4} {:<9} {:<13.6} {:<15.6} {:<13.9} {:<15.6} {:.3}",
            s.count,
            s.improved,
            s.mean_mp_distorted,
            s.mean_mp_compensated,
            s.mean_mp_bound_screen,
            s.mean_mp_bound_receiver,
            s.mean_psnr
        );
    }
    println!(
        "compensation applied at the {} plane; report {}",
        report::COMPENSATION_PLANE,
        a.report.display()
    );
    Ok(())
}

fn inspect_cmd(a: InspectArgs) -> Outcome {
    let params = Params::parse(&a.params).map_err(Failure::Usage)?;
    let artifact = if a.screen {
        Artifact::screen(params)
    } else if a.beam {
        Artifact::beam(params)
    } else {
        Artifact::kernel(params)
    }
    .map_err(Failure::Usage)?;
    artifact.render(&a.out)?;
    println!("wrote {}", a.out.display());
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = init_threads().and_then(|()| match cli.command {
        Command::GenDataset(a) => gen_dataset(a),
        Command::Train(a) => train_cmd(a),
        Command::Eval(a) => eval_cmd(a),
        Command::Inspect(a) => inspect_cmd(a),
    });
    match outcome {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            2
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}
