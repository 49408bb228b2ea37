//! CSV reports.
//!
//! Per-sample metrics use the fixed column order
//! `sample_id, level, mp_distorted, mp_compensated, psnr, epoch`.
//! An exact prediction has `psnr = inf`.

use std::path::Path;

use vortex_ao_core::pipeline::LevelSummary;

use crate::error::Result;
use crate::fsutil;

pub const METRIC_COLUMNS: [&str; 6] = [
    "sample_id",
    "level",
    "mp_distorted",
    "mp_compensated",
    "psnr",
    "epoch",
];
pub const LOSS_COLUMNS: [&str; 2] = ["epoch", "loss"];
pub const SWEEP_COLUMNS: [&str; 5] = [
    "epoch",
    "mean_psnr",
    "mean_mp_distorted",
    "mean_mp_compensated",
    "improved_fraction",
];
pub const SUMMARY_COLUMNS: [&str; 11] = [
    "level",
    "epoch",
    "predictor",
    "compensation_plane",
    "count",
    "improved",
    "mean_mp_distorted",
    "mean_mp_compensated",
    "mean_mp_bound_screen",
    "mean_mp_bound_receiver",
    "mean_psnr",
];

/// Compensation is applied to the stored field at the observation plane.
pub const COMPENSATION_PLANE: &str = "receiver";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricRow {
    pub sample_id: u64,
    pub level: usize,
    pub mp_distorted: f64,
    pub mp_compensated: f64,
    pub psnr: f64,
    /// Epochs the predicting network was trained for; 0 for stubs.
    pub epoch: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub epoch: u32,
    pub mean_psnr: f64,
    pub mean_mp_distorted: f64,
    pub mean_mp_compensated: f64,
    pub improved_fraction: f64,
}

fn write<const N: usize>(
    path: &Path,
    header: [&str; N],
    rows: impl Iterator<Item = [String; N]>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| csv::Error::from(e.into_error()))?;
    fsutil::write_atomic(path, &bytes)
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_metrics(path: &Path, rows: &[MetricRow]) -> Result<()> {
    write(
        path,
        METRIC_COLUMNS,
        rows.iter().map(|r| {
            [
                r.sample_id.to_string(),
                r.level.to_string(),
                num(r.mp_distorted),
                num(r.mp_compensated),
                num(r.psnr),
                r.epoch.to_string(),
            ]
        }),
    )
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricRow>> {
    let mut rows = Vec::new();
    for rec in csv::Reader::from_path(path)?.records() {
        let rec = rec?;
        let f = |i: usize| rec.get(i).unwrap_or("").trim().to_string();
        let bad = |i: usize| {
            crate::Error::Invalid(format!(
                "{}: bad `{}` value `{}`",
                path.display(),
                METRIC_COLUMNS[i],
                f(i)
            ))
        };
        rows.push(MetricRow {
            sample_id: f(0).parse().map_err(|_| bad(0))?,
            level: f(1).parse().map_err(|_| bad(1))?,
            mp_distorted: f(2).parse().map_err(|_| bad(2))?,
            mp_compensated: f(3).parse().map_err(|_| bad(3))?,
            psnr: f(4).parse().map_err(|_| bad(4))?,
            epoch: f(5).parse().map_err(|_| bad(5))?,
        });
    }
    Ok(rows)
}

pub fn write_loss(path: &Path, losses: &[(u32, f64)]) -> Result<()> {
    write(
        path,
        LOSS_COLUMNS,
        losses.iter().map(|&(e, l)| [e.to_string(), num(l)]),
    )
}

pub fn read_loss(path: &Path) -> Result<Vec<(u32, f64)>> {
    let mut out = Vec::new();
    for rec in csv::Reader::from_path(path)?.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<()> {
    write(
        path,
        SWEEP_COLUMNS,
        rows.iter().map(|r| {
            [
                r.epoch.to_string(),
                num(r.mean_psnr),
                num(r.mean_mp_distorted),
                num(r.mean_mp_compensated),
                num(r.improved_fraction),
            ]
        }),
    )
}

pub fn write_summary(path: &Path, rows: &[(usize, u32, &str, LevelSummary)]) -> Result<()> {
    write(
        path,
        SUMMARY_COLUMNS,
        rows.iter().map(|(level, epoch, predictor, s)| {
            [
                level.to_string(),
                epoch.to_string(),
                predictor.to_string(),
                COMPENSATION_PLANE.to_string(),
                s.count.to_string(),
                s.improved.to_string(),
                num(s.mean_mp_distorted),
                num(s.mean_mp_compensated),
                num(s.mean_mp_bound_screen),
                num(s.mean_mp_bound_receiver),
                num(s.mean_psnr),
            ]
        }),
    )
}
