//! CSV outputs. Columns are fixed; floats use the shortest representation
//! that parses back to the same `f64`, so totals re-add exactly from the
//! detail rows.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub trait CsvRow {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

pub fn write_csv<T: CsvRow, W: Write>(out: W, rows: &[T]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(T::HEADER)?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file<T: CsvRow>(path: &Path, rows: &[T]) -> csv::Result<()> {
    write_csv(BufWriter::new(File::create(path)?), rows)
}

/// One row per (seed, sweep value, algorithm).
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub experiment: String,
    pub seed: u64,
    pub algorithm: String,
    pub sweep_axis: String,
    pub sweep_value: Option<f64>,
    /// Sum MOS; for movement runs, summed over slots `1..=S`.
    pub total_mos: f64,
    pub cluster_mos: Vec<f64>,
    pub sum_rate: f64,
    pub evaluations: u64,
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

impl CsvRow for ReportRow {
    const HEADER: &'static [&'static str] = &[
        "experiment",
        "seed",
        "algorithm",
        "sweep_axis",
        "sweep_value",
        "total_mos",
        "cluster_mos",
        "sum_rate",
        "evaluations",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.experiment.clone(),
            self.seed.to_string(),
            self.algorithm.clone(),
            self.sweep_axis.clone(),
            opt(self.sweep_value),
            fmt_f64(self.total_mos),
            self.cluster_mos.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(";"),
            fmt_f64(self.sum_rate),
            self.evaluations.to_string(),
        ]
    }
}

/// Per-user link detail of a deployment result.
#[derive(Debug, Clone, PartialEq)]
pub struct UserRow {
    pub experiment: String,
    pub seed: u64,
    pub algorithm: String,
    pub sweep_value: Option<f64>,
    pub user: usize,
    pub cluster: usize,
    pub x: f64,
    pub y: f64,
    pub distance: f64,
    pub snr: f64,
    pub rate: f64,
    pub mos: f64,
}

impl CsvRow for UserRow {
    const HEADER: &'static [&'static str] = &[
        "experiment",
        "seed",
        "algorithm",
        "sweep_value",
        "user",
        "cluster",
        "x",
        "y",
        "distance",
        "snr",
        "rate",
        "mos",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.experiment.clone(),
            self.seed.to_string(),
            self.algorithm.clone(),
            opt(self.sweep_value),
            self.user.to_string(),
            self.cluster.to_string(),
            fmt_f64(self.x),
            fmt_f64(self.y),
            fmt_f64(self.distance),
            fmt_f64(self.snr),
            fmt_f64(self.rate),
            fmt_f64(self.mos),
        ]
    }
}

/// UAV position and MOS per slot of a movement run. Slot 0 is the starting
/// point; its MOS is not part of the horizon sum.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub experiment: String,
    pub seed: u64,
    pub algorithm: String,
    pub sweep_value: Option<f64>,
    pub time: f64,
    pub uav: usize,
    pub x: f64,
    pub y: f64,
    pub h: f64,
    pub cluster: usize,
    pub cluster_mos: f64,
    pub total_mos: f64,
}

impl CsvRow for TrajectoryRow {
    const HEADER: &'static [&'static str] = &[
        "experiment",
        "seed",
        "algorithm",
        "sweep_value",
        "time",
        "uav_id",
        "x",
        "y",
        "h",
        "cluster",
        "cluster_mos",
        "total_mos",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.experiment.clone(),
            self.seed.to_string(),
            self.algorithm.clone(),
            opt(self.sweep_value),
            fmt_f64(self.time),
            self.uav.to_string(),
            fmt_f64(self.x),
            fmt_f64(self.y),
            fmt_f64(self.h),
            self.cluster.to_string(),
            fmt_f64(self.cluster_mos),
            fmt_f64(self.total_mos),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RewardRow {
    pub experiment: String,
    pub seed: u64,
    pub phase: &'static str,
    pub sweep_value: Option<f64>,
    pub uav: usize,
    pub episode: usize,
    pub reward: f64,
}

impl CsvRow for RewardRow {
    const HEADER: &'static [&'static str] =
        &["experiment", "seed", "phase", "sweep_value", "uav_id", "episode", "reward"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.experiment.clone(),
            self.seed.to_string(),
            self.phase.to_string(),
            opt(self.sweep_value),
            self.uav.to_string(),
            self.episode.to_string(),
            fmt_f64(self.reward),
        ]
    }
}

/// A user whose allocated power is below the worst-case requirement for its
/// SNR target, or a skipped computation.
#[derive(Debug, Clone, PartialEq)]
pub struct WarningRow {
    pub experiment: String,
    pub seed: u64,
    pub algorithm: String,
    pub sweep_value: Option<f64>,
    pub user: Option<usize>,
    pub kind: &'static str,
    pub snr: Option<f64>,
    pub snr_target: Option<f64>,
    pub required_power: Option<f64>,
    pub allocated_power: Option<f64>,
    pub message: String,
}

impl CsvRow for WarningRow {
    const HEADER: &'static [&'static str] = &[
        "experiment",
        "seed",
        "algorithm",
        "sweep_value",
        "user",
        "kind",
        "snr",
        "snr_target",
        "required_power",
        "allocated_power",
        "message",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.experiment.clone(),
            self.seed.to_string(),
            self.algorithm.clone(),
            opt(self.sweep_value),
            self.user.map(|u| u.to_string()).unwrap_or_default(),
            self.kind.to_string(),
            opt(self.snr),
            opt(self.snr_target),
            opt(self.required_power),
            opt(self.allocated_power),
            self.message.clone(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub experiment: String,
    pub seed: u64,
    pub algorithm: String,
    pub sweep_value: Option<f64>,
    pub wall_clock_s: f64,
}

impl CsvRow for TimingRow {
    const HEADER: &'static [&'static str] = &["experiment", "seed", "algorithm", "sweep_value", "wall_clock_s"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.experiment.clone(),
            self.seed.to_string(),
            self.algorithm.clone(),
            opt(self.sweep_value),
            fmt_f64(self.wall_clock_s),
        ]
    }
}
