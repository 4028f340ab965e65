//! Distances between probability images.
//!
//! Every function returns the squared distance; [`root`] gives the distance itself.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::nufft::NufftConfig;
use crate::polar::{PolarGrid, Projector};
use crate::quantile::{sinogram_quantiles, squared_gap, QuantileKind, QuantileMatrix};
use crate::transport::{sinkhorn_cost, squared_distance, transport_simplex};

pub const SINKHORN_MAX_SIZE: usize = 64;
pub const EXACT_W2_MAX_SIZE: usize = 12;
pub const DEFAULT_SINKHORN_LAMBDA: f64 = 0.01;
pub const DEFAULT_SINKHORN_ITERS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Euclidean,
    Sw2,
    Rfsw2,
    McSw2,
    MaxSw2,
    Sinkhorn,
    #[serde(rename = "w2")]
    ExactW2,
}

impl MetricKind {
    pub const ALL: [MetricKind; 7] = [
        MetricKind::Euclidean,
        MetricKind::Sw2,
        MetricKind::Rfsw2,
        MetricKind::McSw2,
        MetricKind::MaxSw2,
        MetricKind::Sinkhorn,
        MetricKind::ExactW2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Euclidean => "euclidean",
            MetricKind::Sw2 => "sw2",
            MetricKind::Rfsw2 => "rfsw2",
            MetricKind::McSw2 => "mcsw2",
            MetricKind::MaxSw2 => "maxsw2",
            MetricKind::Sinkhorn => "sinkhorn",
            MetricKind::ExactW2 => "w2",
        }
    }

    /// Metrics computed from projections.
    pub fn is_sliced(self) -> bool {
        matches!(
            self,
            MetricKind::Sw2 | MetricKind::Rfsw2 | MetricKind::McSw2 | MetricKind::MaxSw2
        )
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MetricKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnsupportedMetric(s.to_string()))
    }
}

/// A metric together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub kind: MetricKind,
    /// Number of projection angles for sliced metrics.
    pub n_angles: usize,
    pub nufft: NufftConfig,
    /// Seed for the random angles of [`MetricKind::McSw2`].
    pub seed: u64,
    pub lambda: f64,
    pub iters: usize,
}

impl Metric {
    pub fn new(kind: MetricKind, n_angles: usize) -> Self {
        Self {
            kind,
            n_angles,
            nufft: NufftConfig::default(),
            seed: 0,
            lambda: DEFAULT_SINKHORN_LAMBDA,
            iters: DEFAULT_SINKHORN_ITERS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind.is_sliced() {
            if self.n_angles == 0 {
                return Err(Error::InvalidParameter("n_angles must be positive".into()));
            }
            self.nufft.validate()?;
        }
        if self.kind == MetricKind::Sinkhorn && (!(self.lambda > 0.0) || self.iters == 0) {
            return Err(Error::InvalidParameter(format!(
                "sinkhorn needs lambda > 0 and iters >= 1 (got {}, {})",
                self.lambda, self.iters
            )));
        }
        Ok(())
    }

    pub fn squared(&self, f: &Image, g: &Image) -> Result<f64> {
        self.validate()?;
        match self.kind {
            MetricKind::Euclidean => euclidean_squared(f, g),
            MetricKind::Sw2 => sw2_squared(f, g, self.n_angles, self.nufft),
            MetricKind::Rfsw2 => rfsw2_squared(f, g, self.n_angles, self.nufft),
            MetricKind::McSw2 => mc_sw2_squared(f, g, self.n_angles, self.seed, self.nufft),
            MetricKind::MaxSw2 => max_sw2_squared(f, g, self.n_angles, self.nufft),
            MetricKind::Sinkhorn => sinkhorn_squared(f, g, self.lambda, self.iters),
            MetricKind::ExactW2 => exact_w2_squared_lp(f, g),
        }
    }
}

pub fn root(squared: f64) -> f64 {
    squared.max(0.0).sqrt()
}

fn same_size(f: &Image, g: &Image) -> Result<()> {
    if f.size() != g.size() {
        return Err(Error::SizeMismatch(f.size(), g.size()));
    }
    Ok(())
}

/// Frequency oversampling used for ramp-filtered projections.
pub const RAMP_PADDING: usize = 4;

/// Cached projectors producing quantile matrices on a fixed polar grid.
#[derive(Clone)]
pub struct SlicedTransform {
    projector: Projector,
    ramp: OnceLock<Projector>,
    ramp_padding: usize,
    cfg: NufftConfig,
}

impl SlicedTransform {
    pub fn new(size: usize, n_angles: usize, cfg: NufftConfig) -> Result<Self> {
        Self::with_grid(PolarGrid::new(size, n_angles)?, cfg)
    }

    pub fn with_grid(grid: PolarGrid, cfg: NufftConfig) -> Result<Self> {
        Ok(Self {
            projector: Projector::new(grid, cfg)?,
            ramp: OnceLock::new(),
            ramp_padding: RAMP_PADDING,
            cfg,
        })
    }

    /// Overrides the frequency oversampling of the ramp-filtered projections.
    pub fn with_ramp_padding(mut self, padding: usize) -> Result<Self> {
        if padding == 0 {
            return Err(Error::InvalidParameter("padding must be positive".into()));
        }
        self.ramp_padding = padding;
        self.ramp = OnceLock::new();
        Ok(self)
    }

    pub fn projector(&self) -> &Projector {
        &self.projector
    }

    pub fn ramp_projector(&self) -> Result<&Projector> {
        if let Some(p) = self.ramp.get() {
            return Ok(p);
        }
        let p = Projector::padded(self.projector.grid().clone(), self.cfg, self.ramp_padding)?;
        Ok(self.ramp.get_or_init(|| p))
    }

    pub fn quantiles(&self, img: &Image) -> Result<QuantileMatrix> {
        let s = self.projector.sinogram(img)?;
        Ok(sinogram_quantiles(&s, QuantileKind::Plain))
    }

    /// Quantiles of the positive and negative parts of the ramp-filtered projections.
    pub fn ramp_quantiles(&self, img: &Image) -> Result<(QuantileMatrix, QuantileMatrix)> {
        let s = self.ramp_projector()?.ramp_sinogram(img)?;
        Ok((
            sinogram_quantiles(&s.pos, QuantileKind::Pos),
            sinogram_quantiles(&s.neg, QuantileKind::Neg),
        ))
    }
}

/// Per-angle `sum_j (u_j - v_j)^2`, zero where either column is empty.
pub fn column_gaps(u: &QuantileMatrix, v: &QuantileMatrix) -> Result<Vec<f64>> {
    if u.size() != v.size() {
        return Err(Error::SizeMismatch(u.size(), v.size()));
    }
    if u.n_angles() != v.n_angles() {
        return Err(Error::LengthMismatch(u.n_angles(), v.n_angles()));
    }
    Ok((0..u.n_angles())
        .map(|k| {
            if u.is_empty_column(k) || v.is_empty_column(k) {
                0.0
            } else {
                squared_gap(u.column(k), v.column(k))
            }
        })
        .collect())
}

/// `||U - V||_F^2 / (n L)` over the nonempty column pairs.
pub fn quantile_gap(u: &QuantileMatrix, v: &QuantileMatrix) -> Result<f64> {
    let total: f64 = column_gaps(u, v)?.iter().sum();
    Ok(total / (u.n_angles() * u.size()) as f64)
}

pub fn sw2_squared(f: &Image, g: &Image, n_angles: usize, cfg: NufftConfig) -> Result<f64> {
    same_size(f, g)?;
    let t = SlicedTransform::new(f.size(), n_angles, cfg)?;
    quantile_gap(&t.quantiles(f)?, &t.quantiles(g)?)
}

pub fn rfsw2_squared(f: &Image, g: &Image, n_angles: usize, cfg: NufftConfig) -> Result<f64> {
    same_size(f, g)?;
    let t = SlicedTransform::new(f.size(), n_angles, cfg)?;
    let (fp, fn_) = t.ramp_quantiles(f)?;
    let (gp, gn) = t.ramp_quantiles(g)?;
    Ok(quantile_gap(&fp, &gp)? + quantile_gap(&fn_, &gn)?)
}

/// Sliced estimate over `n_angles` i.i.d. uniform angles drawn from `seed`.
pub fn mc_sw2_squared(f: &Image, g: &Image, n_angles: usize, seed: u64, cfg: NufftConfig) -> Result<f64> {
    same_size(f, g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angles = (0..n_angles)
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect();
    let t = SlicedTransform::with_grid(PolarGrid::with_angles(f.size(), angles)?, cfg)?;
    quantile_gap(&t.quantiles(f)?, &t.quantiles(g)?)
}

pub fn max_sw2_squared(f: &Image, g: &Image, n_angles: usize, cfg: NufftConfig) -> Result<f64> {
    same_size(f, g)?;
    let t = SlicedTransform::new(f.size(), n_angles, cfg)?;
    let (u, v) = (t.quantiles(f)?, t.quantiles(g)?);
    let gaps = column_gaps(&u, &v)?;
    Ok(gaps.iter().fold(0.0f64, |m, v| m.max(*v)) / u.size() as f64)
}

pub fn euclidean_squared(f: &Image, g: &Image) -> Result<f64> {
    same_size(f, g)?;
    Ok(squared_gap(f.data(), g.data()))
}

/// Pixel masses and center coordinates of the support of `img`.
fn point_cloud(img: &Image) -> (Vec<f64>, Vec<[f64; 2]>) {
    let n = img.size();
    let mut mass = Vec::new();
    let mut pts = Vec::new();
    for r in 0..n {
        for c in 0..n {
            let v = img.get(r, c);
            if v > 0.0 {
                mass.push(v);
                pts.push([img.coord(c), img.coord(r)]);
            }
        }
    }
    (mass, pts)
}

fn require_probability(img: &Image) -> Result<()> {
    if !img.is_probability() {
        return Err(Error::NotNormalized(img.sum()));
    }
    Ok(())
}

/// Transport cost of the entropic plan after `iters` Sinkhorn sweeps.
pub fn sinkhorn_squared(f: &Image, g: &Image, lambda: f64, iters: usize) -> Result<f64> {
    same_size(f, g)?;
    if f.size() > SINKHORN_MAX_SIZE {
        return Err(Error::TooLarge {
            what: "sinkhorn",
            size: f.size(),
            limit: SINKHORN_MAX_SIZE,
        });
    }
    require_probability(f)?;
    require_probability(g)?;
    let (a, xa) = point_cloud(f);
    let (b, xb) = point_cloud(g);
    sinkhorn_cost(&a, &xa, &b, &xb, lambda, iters)
}

/// Exact squared 2-Wasserstein distance between the pixel measures.
pub fn exact_w2_squared_lp(f: &Image, g: &Image) -> Result<f64> {
    same_size(f, g)?;
    if f.size() > EXACT_W2_MAX_SIZE {
        return Err(Error::TooLarge {
            what: "exact transport",
            size: f.size(),
            limit: EXACT_W2_MAX_SIZE,
        });
    }
    let (a, xa) = point_cloud(f);
    let (b, xb) = point_cloud(g);
    let cost: Vec<f64> = xa
        .iter()
        .flat_map(|p| xb.iter().map(move |q| squared_distance(*p, *q)))
        .collect();
    Ok(transport_simplex(&a, &b, &cost)?.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{gaussian_blob, gaussian_mixture, Shift2D};
    use rand::Rng;

    fn blob_pair(size: usize, seed: u64) -> (Image, Image) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mix = |rng: &mut ChaCha8Rng| {
            let comps: Vec<(Shift2D, f64, f64)> = (0..3)
                .map(|_| {
                    (
                        Shift2D::new(rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4)),
                        rng.random_range(0.1..0.25),
                        rng.random_range(0.2..1.0),
                    )
                })
                .collect();
            gaussian_mixture(size, &comps).unwrap()
        };
        (mix(&mut rng), mix(&mut rng))
    }

    #[test]
    fn kinds_round_trip_through_names() {
        for k in MetricKind::ALL {
            assert_eq!(k.name().parse::<MetricKind>().unwrap(), k);
        }
        assert!(matches!("emd".parse::<MetricKind>(), Err(Error::UnsupportedMetric(_))));
    }

    #[test]
    fn euclidean_examples() {
        let a = Image::new(2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let b = Image::new(2, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(euclidean_squared(&a, &b).unwrap(), 2.0);
        assert_eq!(euclidean_squared(&a, &a).unwrap(), 0.0);
        assert!(euclidean_squared(&a, &Image::zeros(3)).is_err());
    }

    #[test]
    fn euclidean_saturates_for_disjoint_supports() {
        let f = gaussian_blob(64, Shift2D::new(-0.5, 0.0), 0.05).unwrap();
        let near = gaussian_blob(64, Shift2D::new(0.1, 0.0), 0.05).unwrap();
        let far = gaussian_blob(64, Shift2D::new(0.5, 0.0), 0.05).unwrap();
        let a = euclidean_squared(&f, &near).unwrap();
        let b = euclidean_squared(&f, &far).unwrap();
        assert!((a - b).abs() < 1e-9 * a);
    }

    #[test]
    fn every_metric_vanishes_on_identical_inputs() {
        let (f, _) = blob_pair(12, 1);
        // the entropic plan spreads mass even between identical measures
        for k in MetricKind::ALL.into_iter().filter(|k| *k != MetricKind::Sinkhorn) {
            let v = Metric::new(k, 12).squared(&f, &f).unwrap();
            assert!(v.abs() <= 1e-12, "{k}: {v:e}");
        }
    }

    #[test]
    fn metrics_are_symmetric_and_nonnegative() {
        let (f, g) = blob_pair(12, 2);
        // a truncated Sinkhorn run ends on a column update, so it is not symmetric
        for k in MetricKind::ALL.into_iter().filter(|k| *k != MetricKind::Sinkhorn) {
            let m = Metric::new(k, 12);
            let a = m.squared(&f, &g).unwrap();
            let b = m.squared(&g, &f).unwrap();
            assert!(a >= 0.0);
            assert!((a - b).abs() <= 1e-9 * a.max(1e-12), "{k}: {a} {b}");
        }
    }

    #[test]
    fn max_dominates_mean() {
        for seed in 0..5 {
            let (f, g) = blob_pair(32, seed);
            let cfg = NufftConfig::default();
            let s = sw2_squared(&f, &g, 32, cfg).unwrap();
            let m = max_sw2_squared(&f, &g, 32, cfg).unwrap();
            assert!(m >= s);
        }
    }

    #[test]
    fn max_slice_follows_shift_direction() {
        let size = 64;
        let f = gaussian_blob(size, Shift2D::default(), 0.1).unwrap();
        let dir = 0.7f64;
        let g = gaussian_blob(size, Shift2D::new(0.25 * dir.cos(), 0.25 * dir.sin()), 0.1).unwrap();
        let n = 64;
        let t = SlicedTransform::new(size, n, NufftConfig::default()).unwrap();
        let gaps = column_gaps(&t.quantiles(&f).unwrap(), &t.quantiles(&g).unwrap()).unwrap();
        let best = gaps
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        let step = std::f64::consts::TAU / n as f64;
        let angle = best as f64 * step;
        // the shift is seen fully along +dir and -dir
        let off = (angle - dir).rem_euclid(std::f64::consts::PI);
        assert!(off.min(std::f64::consts::PI - off) <= step, "{angle} vs {dir}");
    }

    #[test]
    fn monte_carlo_is_deterministic_and_close() {
        let (f, g) = blob_pair(32, 3);
        let cfg = NufftConfig::default();
        let a = mc_sw2_squared(&f, &g, 256, 7, cfg).unwrap();
        let b = mc_sw2_squared(&f, &g, 256, 7, cfg).unwrap();
        assert_eq!(a, b);
        let reference = sw2_squared(&f, &g, 4096, cfg).unwrap();
        let mean = (0..50)
            .map(|s| mc_sw2_squared(&f, &g, 256, s, cfg).unwrap())
            .sum::<f64>()
            / 50.0;
        assert!((mean - reference).abs() <= 0.03 * reference, "{mean} {reference}");
        let dense = mc_sw2_squared(&f, &g, 4096, 1, cfg).unwrap();
        assert!((dense - reference).abs() <= 0.02 * reference, "{dense} {reference}");
    }

    #[test]
    fn exact_w2_single_pixels() {
        let mut a = vec![0.0; 100];
        let mut b = vec![0.0; 100];
        a[2 * 10 + 3] = 1.0;
        b[7 * 10 + 9] = 1.0;
        let f = Image::new(10, a).unwrap().normalize_to_probability(false).unwrap();
        let g = Image::new(10, b).unwrap().normalize_to_probability(false).unwrap();
        let h = 0.2f64;
        let d2 = (6.0 * h).powi(2) + (5.0 * h).powi(2);
        assert!((exact_w2_squared_lp(&f, &g).unwrap() - d2).abs() < 1e-12);
        assert!(matches!(
            exact_w2_squared_lp(&Image::zeros(13), &Image::zeros(13)),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn sinkhorn_near_exact_on_small_pairs() {
        for seed in 0..3 {
            let (f, g) = blob_pair(8, 10 + seed);
            let exact = exact_w2_squared_lp(&f, &g).unwrap();
            for lambda in [0.01, 0.003] {
                let s = sinkhorn_squared(&f, &g, lambda, 2000).unwrap();
                assert!(s >= 0.0);
                assert!(s <= exact + 4.0 * lambda, "{lambda}: {s} {exact}");
            }
        }
        let big = Image::zeros(65);
        assert!(matches!(
            sinkhorn_squared(&big, &big, 0.01, 3),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn sinkhorn_properties() {
        let (f, g) = blob_pair(16, 4);
        let a = sinkhorn_squared(&f, &g, 0.01, 3).unwrap();
        assert_eq!(a, sinkhorn_squared(&f, &g, 0.01, 3).unwrap());
        assert!(a > 0.0);
        let mut d = vec![0.0; 64];
        d[27] = 1.0;
        let p = Image::new(8, d).unwrap().normalize_to_probability(false).unwrap();
        assert_eq!(sinkhorn_squared(&p, &p, 0.01, 3).unwrap(), 0.0);
    }

    #[test]
    fn sliced_is_dominated_by_exact() {
        for seed in 0..4 {
            let (f, g) = blob_pair(12, 20 + seed);
            let s = sw2_squared(&f, &g, 12, NufftConfig::default()).unwrap();
            let w = exact_w2_squared_lp(&f, &g).unwrap();
            assert!(s <= 1.05 * w, "{s} {w}");
        }
    }

    #[test]
    fn parameters_are_validated() {
        let mut m = Metric::new(MetricKind::Sinkhorn, 8);
        m.lambda = -1.0;
        let f = gaussian_blob(8, Shift2D::default(), 0.3).unwrap();
        assert!(m.squared(&f, &f).is_err());
        let m = Metric::new(MetricKind::Sw2, 0);
        assert!(m.squared(&f, &f).is_err());
    }
}
