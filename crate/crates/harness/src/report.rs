//! CSV and JSON report files plus the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use slicealign::RotationProfile;

use crate::bench::TimingTable;
use crate::error::Result;
use crate::experiment::AlignmentReport;
use crate::studies::{ConvergenceStudy, SweepPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

fn snr_cell(snr: Option<f64>) -> String {
    snr.map(|s| s.to_string()).unwrap_or_default()
}

/// Cumulative curves, one row per (metric, shift, threshold); with `snr`
/// the noise level is appended as a last column.
pub fn alignment_csv(report: &AlignmentReport, with_snr: bool) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if with_snr {
        w.write_record(["metric", "shift_px", "threshold_deg", "percent", "snr"])?;
    } else {
        w.write_record(["metric", "shift_px", "threshold_deg", "percent"])?;
    }
    for c in &report.curves {
        let mut row = vec![
            c.metric.name().to_string(),
            c.shift_px.to_string(),
            c.threshold_deg.to_string(),
            c.percent.to_string(),
        ];
        if with_snr {
            row.push(snr_cell(c.snr));
        }
        w.write_record(&row)?;
    }
    finish(w)
}

/// Per-image outcomes.
pub fn records_csv(report: &AlignmentReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "metric", "shift_px", "snr", "true_deg", "recovered_deg", "error_deg"])?;
    for r in &report.records {
        w.write_record([
            r.id.to_string(),
            r.metric.name().to_string(),
            r.shift_px.to_string(),
            snr_cell(r.snr),
            r.true_deg.to_string(),
            r.recovered_deg.to_string(),
            r.error_deg.to_string(),
        ])?;
    }
    finish(w)
}

pub fn sweep_csv(points: &[SweepPoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["theta_deg", "metric", "value_sqrt", "seed", "bound"])?;
    for p in points {
        w.write_record([
            p.theta_deg.to_string(),
            p.metric.clone(),
            p.value_sqrt.to_string(),
            p.seed.to_string(),
            p.bound.to_string(),
        ])?;
    }
    finish(w)
}

pub fn profile_csv(profile: &RotationProfile) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["l", "angle_deg", "d2"])?;
    for (l, v) in profile.values().iter().enumerate() {
        w.write_record([l.to_string(), profile.angle(l).to_degrees().to_string(), v.to_string()])?;
    }
    finish(w)
}

pub fn timing_csv(table: &TimingTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["metric", "mode", "size", "median_s", "slope"])?;
    for r in &table.rows {
        let slope = table.slope(r.metric, r.mode).map(|s| s.to_string()).unwrap_or_default();
        w.write_record([
            r.metric.name().to_string(),
            r.mode.name().to_string(),
            r.size.to_string(),
            r.median_s.to_string(),
            slope,
        ])?;
    }
    finish(w)
}

pub fn convergence_csv(study: &ConvergenceStudy) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["size", "n_angles", "value", "error"])?;
    w.write_record([
        study.reference_size.to_string(),
        study.reference_angles.to_string(),
        study.reference.to_string(),
        "0".to_string(),
    ])?;
    for r in &study.rows {
        w.write_record([r.size.to_string(), r.n_angles.to_string(), r.value.to_string(), r.error.to_string()])?;
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, Serialize)]
pub struct Host {
    pub os: &'static str,
    pub arch: &'static str,
    pub threads: usize,
}

/// Provenance record written next to every report.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest<C: Serialize> {
    pub command: String,
    pub version: &'static str,
    pub seed: u64,
    pub config: C,
    pub outputs: Vec<String>,
    pub host: Host,
}

impl<C: Serialize> Manifest<C> {
    pub fn new(command: &str, seed: u64, config: C) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            seed,
            config,
            outputs: Vec::new(),
            host: Host {
                os: std::env::consts::OS,
                arch: std::env::consts::ARCH,
                threads: rayon::current_num_threads(),
            },
        }
    }
}

/// Writes files into one output directory and remembers their names.
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    /// Writes `<stem>_manifest.json` listing everything written so far.
    pub fn finish<C: Serialize>(mut self, stem: &str, mut manifest: Manifest<C>) -> Result<PathBuf> {
        manifest.outputs = self.written.clone();
        self.write_json(&format!("{stem}_manifest.json"), &manifest)
    }
}
