//! Rotational alignment of perturbed image sets against a fixed reference.

use std::f64::consts::TAU;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use slicealign::rotation::brute_rotation_profile;
use slicealign::{Aligner, Image, Metric, MetricKind, NoiseSpec, Shift2D, ShiftMode};

use crate::data::{self, MNIST_SIZE};
use crate::error::{HarnessError, Result};

/// Largest threshold of the cumulative accuracy curves, in degrees.
pub const MAX_THRESHOLD_DEG: u32 = 45;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Alignment,
    Noise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub digits: Vec<u8>,
    pub size: usize,
    pub shifts: Vec<u32>,
    /// Signal-to-noise ratios; only used by the noise experiment.
    pub snrs: Vec<f64>,
    pub n_angles: usize,
    pub metrics: Vec<MetricKind>,
    pub seed: u64,
    pub mnist_dir: PathBuf,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn alignment() -> Self {
        Self {
            kind: ExperimentKind::Alignment,
            digits: vec![2],
            size: MNIST_SIZE,
            shifts: vec![0, 2, 4, 6],
            snrs: Vec::new(),
            n_angles: MNIST_SIZE,
            metrics: vec![MetricKind::Euclidean, MetricKind::Sw2, MetricKind::Rfsw2],
            seed: 0,
            mnist_dir: data::mnist_dir(),
            out_dir: None,
        }
    }

    pub fn noise() -> Self {
        Self {
            kind: ExperimentKind::Noise,
            shifts: vec![0, 3],
            snrs: vec![100.0, 10.0, 1.0, 0.1],
            ..Self::alignment()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Args(m));
        if self.digits.is_empty() || self.digits.iter().any(|&d| d > 9) {
            return bad(format!("digits must be a nonempty subset of 0..=9, got {:?}", self.digits));
        }
        if self.metrics.is_empty() {
            return bad("at least one metric is required".into());
        }
        if self.size < 28 {
            return bad(format!("image size {} is smaller than the 28 px digits", self.size));
        }
        if self.n_angles == 0 {
            return bad("n_angles must be positive".into());
        }
        if self.shifts.is_empty() || self.shifts.iter().any(|&s| 2 * s as usize >= self.size) {
            return bad(format!("shifts {:?} must be nonempty and below half the image size", self.shifts));
        }
        if self.kind == ExperimentKind::Noise
            && (self.snrs.is_empty() || self.snrs.iter().any(|s| !(*s > 0.0))) {
                return bad(format!("snrs must be nonempty and positive, got {:?}", self.snrs));
            }
        Ok(())
    }

    fn conditions(&self) -> Vec<Option<f64>> {
        match self.kind {
            ExperimentKind::Alignment => vec![None],
            ExperimentKind::Noise => self.snrs.iter().map(|&s| Some(s)).collect(),
        }
    }
}

/// One rotated and shifted copy of a source image with its ground truth.
#[derive(Debug, Clone)]
pub struct Perturbed {
    pub id: usize,
    pub image: Image,
    /// Applied rotation in `[0, 2 pi)`.
    pub angle: f64,
    /// Applied integer shift in pixels, `(x, y)`.
    pub shift: (i64, i64),
    /// Seed for any noise added to this image later.
    pub noise_seed: u64,
}

/// Random generator for image `index`: the master seed picks the key, the
/// index picks the stream, so results do not depend on scheduling.
pub fn image_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Rotates each image by a uniform angle (bilinear), then shifts it by
/// `(+-shift_px, +-shift_px)` with independent signs and renormalizes.
pub fn perturb_dataset(images: &[Image], shift_px: u32, seed: u64) -> Result<Vec<Perturbed>> {
    images
        .par_iter()
        .enumerate()
        .map(|(id, img)| {
            let mut rng = image_rng(seed, id);
            let angle = rng.random_range(0.0..TAU);
            let s = shift_px as i64;
            let sx = if rng.random::<bool>() { s } else { -s };
            let sy = if rng.random::<bool>() { s } else { -s };
            let noise_seed = rng.random();
            let image = img
                .apply_rotation(angle)
                .apply_shift(Shift2D::from_pixels(sx as f64, sy as f64, img.size()), ShiftMode::Integer)?
                .normalize_to_probability(true)?;
            Ok(Perturbed {
                id,
                image,
                angle,
                shift: (sx, sy),
                noise_seed,
            })
        })
        .collect()
}

/// Adds white noise at `snr`, keeps the positive part and renormalizes it.
pub fn noisy_positive_part(img: &Image, snr: f64, seed: u64) -> Result<Image> {
    let noisy = img.add_gaussian_noise(NoiseSpec::new(snr, seed)?);
    Ok(noisy.split_signed().0.normalize_to_probability(false)?)
}

/// `min(|a - b|, 2 pi - |a - b|)` for angles reduced mod `2 pi`, in degrees.
pub fn circular_error_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d).to_degrees()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageRecord {
    pub id: usize,
    pub metric: MetricKind,
    pub shift_px: u32,
    pub snr: Option<f64>,
    pub true_deg: f64,
    pub recovered_deg: f64,
    pub error_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub metric: MetricKind,
    pub shift_px: u32,
    pub snr: Option<f64>,
    pub threshold_deg: u32,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub metric: MetricKind,
    pub shift_px: u32,
    pub snr: Option<f64>,
    pub count: usize,
    pub within_15: f64,
    pub within_45: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentReport {
    pub digit: Option<u8>,
    pub reference_index: Option<usize>,
    pub records: Vec<ImageRecord>,
    pub curves: Vec<CurvePoint>,
    pub summary: Vec<SummaryRow>,
}

impl AlignmentReport {
    /// Percent aligned within `threshold_deg` for one condition, if present.
    pub fn percent_within(&self, metric: MetricKind, shift_px: u32, snr: Option<f64>, threshold_deg: f64) -> Option<f64> {
        let errs: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.metric == metric && r.shift_px == shift_px && r.snr == snr)
            .map(|r| r.error_deg)
            .collect();
        if errs.is_empty() {
            return None;
        }
        Some(percent_le(&errs, threshold_deg))
    }
}

fn percent_le(errs: &[f64], threshold: f64) -> f64 {
    100.0 * errs.iter().filter(|&&e| e <= threshold).count() as f64 / errs.len() as f64
}

enum Plan {
    Fast(Box<Aligner>),
    Brute(Image, Metric),
}

impl Plan {
    fn new(reference: &Image, metric: Metric) -> Result<Self> {
        match metric.kind {
            MetricKind::Euclidean | MetricKind::Sw2 | MetricKind::Rfsw2 | MetricKind::MaxSw2 => {
                Ok(Plan::Fast(Box::new(Aligner::new(reference, metric)?)))
            }
            _ => {
                metric.validate()?;
                Ok(Plan::Brute(reference.clone(), metric))
            }
        }
    }

    fn angle(&self, target: &Image) -> Result<f64> {
        let profile = match self {
            Plan::Fast(a) => a.profile(target)?,
            Plan::Brute(r, m) => brute_rotation_profile(r, target, *m)?,
        };
        Ok(profile.best_angle())
    }
}

/// Aligns perturbed copies of `targets` to `reference` under every
/// (shift, noise level, metric) combination.
pub fn run_alignment(
    reference: &Image,
    targets: &[Image],
    shifts: &[u32],
    snrs: &[Option<f64>],
    metrics: &[MetricKind],
    n_angles: usize,
    seed: u64,
) -> Result<AlignmentReport> {
    if targets.is_empty() {
        return Err(HarnessError::NoImages);
    }
    let plans = metrics
        .iter()
        .map(|&k| Plan::new(reference, Metric::new(k, n_angles)))
        .collect::<Result<Vec<_>>>()?;
    let mut records = Vec::new();
    for &shift_px in shifts {
        let perturbed = perturb_dataset(targets, shift_px, seed)?;
        for &snr in snrs {
            let inputs: Vec<Image> = match snr {
                None => perturbed.iter().map(|p| p.image.clone()).collect(),
                Some(s) => perturbed
                    .par_iter()
                    .map(|p| noisy_positive_part(&p.image, s, p.noise_seed))
                    .collect::<Result<_>>()?,
            };
            for plan in &plans {
                let angles: Vec<f64> = inputs.par_iter().map(|img| plan.angle(img)).collect::<Result<_>>()?;
                let kind = match plan {
                    Plan::Fast(a) => a.metric().kind,
                    Plan::Brute(_, m) => m.kind,
                };
                records.extend(perturbed.iter().zip(angles).map(|(p, a)| ImageRecord {
                    id: p.id,
                    metric: kind,
                    shift_px,
                    snr,
                    true_deg: p.angle.to_degrees(),
                    recovered_deg: a.to_degrees(),
                    error_deg: circular_error_deg(a, p.angle),
                }));
            }
        }
    }
    let (curves, summary) = summarize(&records, shifts, snrs, metrics);
    Ok(AlignmentReport {
        digit: None,
        reference_index: None,
        records,
        curves,
        summary,
    })
}

fn summarize(
    records: &[ImageRecord],
    shifts: &[u32],
    snrs: &[Option<f64>],
    metrics: &[MetricKind],
) -> (Vec<CurvePoint>, Vec<SummaryRow>) {
    let mut curves = Vec::new();
    let mut summary = Vec::new();
    for &shift_px in shifts {
        for &snr in snrs {
            for &metric in metrics {
                let errs: Vec<f64> = records
                    .iter()
                    .filter(|r| r.metric == metric && r.shift_px == shift_px && r.snr == snr)
                    .map(|r| r.error_deg)
                    .collect();
                curves.extend((0..=MAX_THRESHOLD_DEG).map(|t| CurvePoint {
                    metric,
                    shift_px,
                    snr,
                    threshold_deg: t,
                    percent: percent_le(&errs, t as f64),
                }));
                summary.push(SummaryRow {
                    metric,
                    shift_px,
                    snr,
                    count: errs.len(),
                    within_15: percent_le(&errs, 15.0),
                    within_45: percent_le(&errs, 45.0),
                });
            }
        }
    }
    (curves, summary)
}

/// Loads one digit, picks and excludes the reference, and aligns the rest.
pub fn run_digit(cfg: &ExperimentConfig, digit: u8) -> Result<AlignmentReport> {
    cfg.validate()?;
    let (images_path, labels_path) = data::mnist_files(&cfg.mnist_dir);
    let mut images = data::load_mnist(&images_path, &labels_path, digit, cfg.size)?;
    let (index, reference) = data::pick_reference(&images)?;
    images.remove(index);
    let mut report = run_alignment(
        &reference,
        &images,
        &cfg.shifts,
        &cfg.conditions(),
        &cfg.metrics,
        cfg.n_angles,
        cfg.seed,
    )?;
    report.digit = Some(digit);
    report.reference_index = Some(index);
    Ok(report)
}

/// Clean-image alignment for every configured digit.
pub fn run_alignment_experiment(cfg: &ExperimentConfig) -> Result<Vec<AlignmentReport>> {
    let cfg = ExperimentConfig {
        kind: ExperimentKind::Alignment,
        ..cfg.clone()
    };
    cfg.digits.iter().map(|&d| run_digit(&cfg, d)).collect()
}

/// Alignment of noisy targets (positive part, renormalized) to the clean reference.
pub fn run_noise_experiment(cfg: &ExperimentConfig) -> Result<Vec<AlignmentReport>> {
    let cfg = ExperimentConfig {
        kind: ExperimentKind::Noise,
        ..cfg.clone()
    };
    cfg.digits.iter().map(|&d| run_digit(&cfg, d)).collect()
}
