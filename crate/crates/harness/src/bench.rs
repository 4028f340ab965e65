//! Wall-clock scaling of single distances and full rotation profiles.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use slicealign::{Aligner, Image, Metric, MetricKind};

use crate::error::{HarnessError, Result};
use crate::studies::fit_slope;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub metrics: Vec<MetricKind>,
    pub rotations: bool,
    pub single: bool,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![32, 64, 96, 128],
            trials: 3,
            metrics: vec![MetricKind::Euclidean, MetricKind::Sw2, MetricKind::Rfsw2],
            rotations: true,
            single: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchMode {
    Single,
    Rotation,
}

impl BenchMode {
    pub fn name(self) -> &'static str {
        match self {
            BenchMode::Single => "single",
            BenchMode::Rotation => "rotation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub metric: MetricKind,
    pub mode: BenchMode,
    pub size: usize,
    pub median_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeRow {
    pub metric: MetricKind,
    pub mode: BenchMode,
    /// Least-squares slope of `ln time` against `ln L`.
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingTable {
    pub rows: Vec<TimingRow>,
    pub slopes: Vec<SlopeRow>,
}

impl TimingTable {
    pub fn slope(&self, metric: MetricKind, mode: BenchMode) -> Option<f64> {
        self.slopes
            .iter()
            .find(|s| s.metric == metric && s.mode == mode)
            .map(|s| s.slope)
    }

    pub fn median(&self, metric: MetricKind, mode: BenchMode, size: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.metric == metric && r.mode == mode && r.size == size)
            .map(|r| r.median_s)
    }
}

/// Dense image with i.i.d. uniform pixels, normalized to unit mass.
pub fn random_image(size: usize, rng: &mut ChaCha8Rng) -> Result<Image> {
    Ok(Image::from_fn(size, |_, _| rng.random::<f64>()).normalize_to_probability(false)?)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Whether the metric can be timed at this size within the library's guards.
fn supported(metric: MetricKind, mode: BenchMode, size: usize) -> bool {
    match (metric, mode) {
        (MetricKind::ExactW2, _) => size <= 12,
        (MetricKind::Sinkhorn, BenchMode::Single) => size <= 64,
        (MetricKind::Sinkhorn | MetricKind::McSw2, BenchMode::Rotation) => false,
        _ => true,
    }
}

/// Shortest wall time of one timed sample; faster calls are repeated and averaged.
const MIN_SAMPLE_S: f64 = 0.02;

fn call(metric: Metric, mode: BenchMode, f: &Image, g: &Image) -> Result<()> {
    match mode {
        BenchMode::Single => {
            std::hint::black_box(metric.squared(f, g)?);
        }
        BenchMode::Rotation => {
            std::hint::black_box(Aligner::new(f, metric)?.profile(g)?);
        }
    }
    Ok(())
}

/// Mean seconds per call over `reps` back-to-back calls.
fn time_batch(metric: Metric, mode: BenchMode, f: &Image, g: &Image, reps: usize) -> Result<f64> {
    let start = Instant::now();
    for _ in 0..reps {
        call(metric, mode, f, g)?;
    }
    Ok(start.elapsed().as_secs_f64() / reps as f64)
}

/// Median timings on a single worker thread. Calls shorter than 20 ms are
/// batched so that each sample spans at least that long. Rotation profiles
/// use `n = L` grid angles; exact-W2 is only timed for `L <= 12`.
pub fn run_timing_bench(cfg: &BenchConfig) -> Result<TimingTable> {
    if cfg.trials == 0 {
        return Err(HarnessError::Args("trials must be positive".into()));
    }
    if cfg.sizes.is_empty() || cfg.sizes.iter().any(|&s| s < 4) {
        return Err(HarnessError::Args(format!("sizes must be at least 4, got {:?}", cfg.sizes)));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| HarnessError::Args(format!("cannot build worker pool: {e}")))?;
    pool.install(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let images = cfg
            .sizes
            .iter()
            .map(|&s| Ok((s, random_image(s, &mut rng)?, random_image(s, &mut rng)?)))
            .collect::<Result<Vec<_>>>()?;
        let mut modes = Vec::new();
        if cfg.single {
            modes.push(BenchMode::Single);
        }
        if cfg.rotations {
            modes.push(BenchMode::Rotation);
        }
        let mut rows = Vec::new();
        let mut slopes = Vec::new();
        for &kind in &cfg.metrics {
            for &mode in &modes {
                let mut pts = Vec::new();
                for (size, f, g) in &images {
                    if !supported(kind, mode, *size) {
                        continue;
                    }
                    let metric = Metric::new(kind, *size);
                    // the warm-up call also sizes the batches
                    let first = time_batch(metric, mode, f, g, 1)?;
                    let reps = (MIN_SAMPLE_S / first.max(1e-9)).ceil().clamp(1.0, 10_000.0) as usize;
                    let times = (0..cfg.trials)
                        .map(|_| time_batch(metric, mode, f, g, reps))
                        .collect::<Result<Vec<_>>>()?;
                    let m = median(times);
                    pts.push(((*size as f64).ln(), m.ln()));
                    rows.push(TimingRow {
                        metric: kind,
                        mode,
                        size: *size,
                        median_s: m,
                    });
                }
                if pts.len() >= 2 {
                    slopes.push(SlopeRow {
                        metric: kind,
                        mode,
                        slope: fit_slope(&pts),
                    });
                }
            }
        }
        Ok(TimingTable { rows, slopes })
    })
}
