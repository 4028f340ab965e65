//! Exhaustive in-plane rotational alignment.
//!
//! Rotating an image by `r_l = 2 pi l / n` cyclically shifts the columns of its
//! sinogram by `l`, so for sliced metrics the whole profile
//! `d_l = ||U - T_l V||_F^2` reduces to the norms of `U` and `V` plus a sum of
//! row-wise circular cross-correlations, evaluated with length-`n` FFTs.

use std::f64::consts::TAU;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::Image;
use crate::metrics::{euclidean_squared, Metric, MetricKind, SlicedTransform};
use crate::polar::SliceFilter;
use crate::quantile::{squared_gap, QuantileMatrix};

/// Largest negative value treated as cancellation error and clamped to zero.
const NEGATIVE_GUARD: f64 = 1e-9;
pub const BRUTE_MAX_ANGLES: usize = 512;

/// Squared distances `d_l` between a reference and the target rotated back by `r_l`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotationProfile {
    values: Vec<f64>,
    argmin: usize,
}

impl RotationProfile {
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("empty rotation profile".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        for v in values.iter_mut() {
            if *v < 0.0 && *v >= -NEGATIVE_GUARD {
                *v = 0.0;
            }
        }
        // first minimum wins ties
        let argmin = values
            .iter()
            .enumerate()
            .fold(0, |best, (l, v)| if *v < values[best] { l } else { best });
        Ok(Self { values, argmin })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn argmin(&self) -> usize {
        self.argmin
    }

    pub fn angle(&self, l: usize) -> f64 {
        TAU * l as f64 / self.values.len() as f64
    }

    pub fn best_angle(&self) -> f64 {
        self.angle(self.argmin)
    }

    pub fn best_value(&self) -> f64 {
        self.values[self.argmin]
    }

    /// `max_l |a_l - b_l| / max_l |b_l|`.
    pub fn max_relative_deviation(&self, reference: &RotationProfile) -> f64 {
        let scale = reference.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diff = self
            .values
            .iter()
            .zip(&reference.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AlignmentResult {
    /// Recovered rotation in `[0, 2 pi)`.
    pub angle: f64,
    pub value: f64,
    pub metric: MetricKind,
    pub profile: Option<RotationProfile>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum EuclideanMode {
    /// Rotate the target explicitly for every grid angle.
    #[default]
    Exact,
    /// Correlate the raw sinograms instead of the images.
    Sino,
}

/// Column-major `size x n` matrix with per-column presence flags.
struct Columns<'a> {
    size: usize,
    n: usize,
    data: &'a [f64],
    present: Vec<bool>,
}

impl<'a> Columns<'a> {
    fn from_quantiles(q: &'a QuantileMatrix) -> Self {
        Self {
            size: q.size(),
            n: q.n_angles(),
            data: q.data(),
            present: q.empty_flags().iter().map(|e| !e).collect(),
        }
    }

    fn dense(size: usize, n: usize, data: &'a [f64]) -> Self {
        Self {
            size,
            n,
            data,
            present: vec![true; n],
        }
    }

    fn column(&self, k: usize) -> &[f64] {
        &self.data[k * self.size..(k + 1) * self.size]
    }

    fn row(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |k| self.data[k * self.size + i])
    }

    fn norms(&self) -> Vec<f64> {
        (0..self.n)
            .map(|k| if self.present[k] { self.column(k).iter().map(|x| x * x).sum() } else { 0.0 })
            .collect()
    }

    fn indicator(&self) -> Vec<f64> {
        self.present.iter().map(|&p| if p { 1.0 } else { 0.0 }).collect()
    }
}

fn check_shapes(u: &Columns, v: &Columns) -> Result<()> {
    if u.size != v.size {
        return Err(Error::SizeMismatch(u.size, v.size));
    }
    if u.n != v.n {
        return Err(Error::LengthMismatch(u.n, v.n));
    }
    Ok(())
}

/// `sum_k [U_k, V_{k+l} both present] ||U_k - V_{k+l}||^2` for every `l`, by FFT.
fn shifted_gaps_fft(u: &Columns, v: &Columns) -> Result<Vec<f64>> {
    check_shapes(u, v)?;
    let n = u.n;
    let fft = FftPlanner::new().plan_fft_forward(n);
    let ifft = FftPlanner::new().plan_fft_inverse(n);

    // FFT of a + i b gives both spectra: A_k = (Z_k + conj Z_{-k}) / 2, B_k = (Z_k - conj Z_{-k}) / 2i
    let cross_spectrum = |a: &mut dyn Iterator<Item = f64>, b: &mut dyn Iterator<Item = f64>, scratch: &mut Vec<Complex64>| {
        let mut z: Vec<Complex64> = a.zip(b).map(|(x, y)| Complex64::new(x, y)).collect();
        fft.process_with_scratch(&mut z, scratch);
        (0..n)
            .map(|k| {
                let zk = z[k];
                let zr = z[(n - k) % n].conj();
                let ak = (zk + zr) * 0.5;
                let bk = (zk - zr) * Complex64::new(0.0, -0.5);
                ak.conj() * bk
            })
            .collect::<Vec<_>>()
    };

    let rows: Vec<Complex64> = (0..u.size)
        .into_par_iter()
        .fold(
            || (vec![Complex64::default(); n], vec![Complex64::default(); fft.get_inplace_scratch_len()]),
            |(mut acc, mut scratch), i| {
                let spec = cross_spectrum(&mut u.row(i), &mut v.row(i), &mut scratch);
                for (a, s) in acc.iter_mut().zip(spec) {
                    *a += s;
                }
                (acc, scratch)
            },
        )
        .map(|(acc, _)| acc)
        .reduce(
            || vec![Complex64::default(); n],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let norm_u = cross_spectrum(&mut u.norms().into_iter(), &mut v.indicator().into_iter(), &mut scratch);
    let norm_v = cross_spectrum(&mut u.indicator().into_iter(), &mut v.norms().into_iter(), &mut scratch);
    let mut total: Vec<Complex64> = (0..n)
        .map(|k| norm_u[k] + norm_v[k] - rows[k] * 2.0)
        .collect();
    let mut scratch = vec![Complex64::default(); ifft.get_inplace_scratch_len()];
    ifft.process_with_scratch(&mut total, &mut scratch);
    Ok(total.iter().map(|z| z.re / n as f64).collect())
}

/// Direct evaluation of the per-shift column gaps, as `(sum, max)` per shift.
fn shifted_gaps_direct(u: &Columns, v: &Columns) -> Result<Vec<(f64, f64)>> {
    check_shapes(u, v)?;
    let n = u.n;
    Ok((0..n)
        .into_par_iter()
        .map(|l| {
            (0..n).fold((0.0, 0.0f64), |(sum, max), k| {
                let kl = (k + l) % n;
                if u.present[k] && v.present[kl] {
                    let g = squared_gap(u.column(k), v.column(kl));
                    (sum + g, max.max(g))
                } else {
                    (sum, max)
                }
            })
        })
        .collect())
}

/// Rotation profile of a reference against arbitrary targets, with the
/// reference's projections computed once.
pub struct Aligner {
    metric: Metric,
    euclidean_mode: EuclideanMode,
    reference: Image,
    transform: Option<SlicedTransform>,
    ref_plain: Option<QuantileMatrix>,
    ref_ramp: Option<(QuantileMatrix, QuantileMatrix)>,
    ref_raw: Option<Vec<f64>>,
}

impl Aligner {
    pub fn new(reference: &Image, metric: Metric) -> Result<Self> {
        Self::with_euclidean_mode(reference, metric, EuclideanMode::Exact)
    }

    pub fn with_euclidean_mode(reference: &Image, metric: Metric, mode: EuclideanMode) -> Result<Self> {
        metric.validate()?;
        if metric.n_angles == 0 {
            return Err(Error::InvalidParameter("n_angles must be positive".into()));
        }
        let mut a = Self {
            metric,
            euclidean_mode: mode,
            reference: reference.clone(),
            transform: None,
            ref_plain: None,
            ref_ramp: None,
            ref_raw: None,
        };
        let size = reference.size();
        match (metric.kind, mode) {
            (MetricKind::Sw2 | MetricKind::MaxSw2, _) => {
                let t = SlicedTransform::new(size, metric.n_angles, metric.nufft)?;
                a.ref_plain = Some(t.quantiles(reference)?);
                a.transform = Some(t);
            }
            (MetricKind::Rfsw2, _) => {
                let t = SlicedTransform::new(size, metric.n_angles, metric.nufft)?;
                a.ref_ramp = Some(t.ramp_quantiles(reference)?);
                a.transform = Some(t);
            }
            (MetricKind::Euclidean, EuclideanMode::Sino) => {
                let t = SlicedTransform::new(size, metric.n_angles, metric.nufft)?;
                a.ref_raw = Some(t.projector().raw_columns(reference, SliceFilter::None)?);
                a.transform = Some(t);
            }
            (MetricKind::Euclidean, EuclideanMode::Exact) => {}
            (kind, _) => return Err(Error::UnsupportedMetric(kind.name().to_string())),
        }
        Ok(a)
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn profile(&self, target: &Image) -> Result<RotationProfile> {
        if target.size() != self.reference.size() {
            return Err(Error::SizeMismatch(self.reference.size(), target.size()));
        }
        let n = self.metric.n_angles;
        let size = self.reference.size();
        let values = match self.metric.kind {
            MetricKind::Sw2 => {
                let t = self.transform.as_ref().expect("planned");
                let v = t.quantiles(target)?;
                let u = self.ref_plain.as_ref().expect("planned");
                let scale = 1.0 / (n * u.size()) as f64;
                scaled(shifted_gaps_fft(&Columns::from_quantiles(u), &Columns::from_quantiles(&v))?, scale)
            }
            MetricKind::Rfsw2 => {
                let t = self.transform.as_ref().expect("planned");
                let (vp, vn) = t.ramp_quantiles(target)?;
                let (up, un) = self.ref_ramp.as_ref().expect("planned");
                let scale = 1.0 / (n * up.size()) as f64;
                let pos = shifted_gaps_fft(&Columns::from_quantiles(up), &Columns::from_quantiles(&vp))?;
                let neg = shifted_gaps_fft(&Columns::from_quantiles(un), &Columns::from_quantiles(&vn))?;
                pos.iter().zip(&neg).map(|(a, b)| (a + b) * scale).collect()
            }
            MetricKind::MaxSw2 => {
                let t = self.transform.as_ref().expect("planned");
                let v = t.quantiles(target)?;
                let u = self.ref_plain.as_ref().expect("planned");
                let rows = u.size() as f64;
                shifted_gaps_direct(&Columns::from_quantiles(u), &Columns::from_quantiles(&v))?
                    .into_iter()
                    .map(|(_, max)| max / rows)
                    .collect()
            }
            MetricKind::Euclidean => match self.euclidean_mode {
                EuclideanMode::Exact => rotated_profile(&self.reference, target, n, euclidean_squared)?,
                EuclideanMode::Sino => {
                    let t = self.transform.as_ref().expect("planned");
                    let raw = t.projector().raw_columns(target, SliceFilter::None)?;
                    let u = self.ref_raw.as_ref().expect("planned");
                    shifted_gaps_fft(&Columns::dense(size, n, u), &Columns::dense(size, n, &raw))?
                }
            },
            kind => return Err(Error::UnsupportedMetric(kind.name().to_string())),
        };
        RotationProfile::from_values(values)
    }

    pub fn align(&self, target: &Image) -> Result<AlignmentResult> {
        let start = Instant::now();
        let profile = self.profile(target)?;
        Ok(AlignmentResult {
            angle: profile.best_angle(),
            value: profile.best_value(),
            metric: self.metric.kind,
            wall_time_s: start.elapsed().as_secs_f64(),
            profile: Some(profile),
        })
    }
}

fn scaled(v: Vec<f64>, s: f64) -> Vec<f64> {
    v.into_iter().map(|x| x * s).collect()
}

/// `d(F, R_{-r_l} G)` for every grid rotation, by explicit image rotation.
fn rotated_profile(
    f: &Image,
    g: &Image,
    n: usize,
    dist: impl Fn(&Image, &Image) -> Result<f64> + Sync,
) -> Result<Vec<f64>> {
    (0..n)
        .into_par_iter()
        .map(|l| dist(f, &g.apply_rotation(-TAU * l as f64 / n as f64)))
        .collect()
}

pub fn rotation_profile_sw2(f: &Image, g: &Image, n: usize, cfg: crate::NufftConfig) -> Result<RotationProfile> {
    let mut m = Metric::new(MetricKind::Sw2, n);
    m.nufft = cfg;
    Aligner::new(f, m)?.profile(g)
}

pub fn rotation_profile_rfsw2(f: &Image, g: &Image, n: usize, cfg: crate::NufftConfig) -> Result<RotationProfile> {
    let mut m = Metric::new(MetricKind::Rfsw2, n);
    m.nufft = cfg;
    Aligner::new(f, m)?.profile(g)
}

pub fn rotation_profile_euclidean(f: &Image, g: &Image, n: usize, mode: EuclideanMode) -> Result<RotationProfile> {
    Aligner::with_euclidean_mode(f, Metric::new(MetricKind::Euclidean, n), mode)?.profile(g)
}

/// Grid-resolution rotation minimizing `metric` between `f` and rotations of `g`.
pub fn align(f: &Image, g: &Image, metric: Metric) -> Result<AlignmentResult> {
    let start = Instant::now();
    let mut result = Aligner::new(f, metric)?.align(g)?;
    result.wall_time_s = start.elapsed().as_secs_f64();
    Ok(result)
}

/// Reference profile evaluated term by term: explicit column shifts for the
/// grid-based sliced metrics, explicit image rotations otherwise.
pub fn brute_rotation_profile(f: &Image, g: &Image, metric: Metric) -> Result<RotationProfile> {
    metric.validate()?;
    let n = metric.n_angles;
    if n > BRUTE_MAX_ANGLES {
        return Err(Error::TooLarge {
            what: "brute rotation profile",
            size: n,
            limit: BRUTE_MAX_ANGLES,
        });
    }
    if f.size() != g.size() {
        return Err(Error::SizeMismatch(f.size(), g.size()));
    }
    let size = f.size();
    let values = match metric.kind {
        MetricKind::Sw2 | MetricKind::MaxSw2 => {
            let t = SlicedTransform::new(size, n, metric.nufft)?;
            let (u, v) = (t.quantiles(f)?, t.quantiles(g)?);
            let rows = u.size() as f64;
            let gaps = shifted_gaps_direct(&Columns::from_quantiles(&u), &Columns::from_quantiles(&v))?;
            if metric.kind == MetricKind::Sw2 {
                gaps.into_iter().map(|(s, _)| s / (n as f64 * rows)).collect()
            } else {
                gaps.into_iter().map(|(_, m)| m / rows).collect()
            }
        }
        MetricKind::Rfsw2 => {
            let t = SlicedTransform::new(size, n, metric.nufft)?;
            let ((up, un), (vp, vn)) = (t.ramp_quantiles(f)?, t.ramp_quantiles(g)?);
            let scale = 1.0 / (n * up.size()) as f64;
            let pos = shifted_gaps_direct(&Columns::from_quantiles(&up), &Columns::from_quantiles(&vp))?;
            let neg = shifted_gaps_direct(&Columns::from_quantiles(&un), &Columns::from_quantiles(&vn))?;
            pos.iter().zip(&neg).map(|(a, b)| (a.0 + b.0) * scale).collect()
        }
        MetricKind::Euclidean => rotated_profile(f, g, n, euclidean_squared)?,
        _ => rotated_profile(f, g, n, |a, b| metric.squared(a, &b.normalize_to_probability(true)?))?,
    };
    RotationProfile::from_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{gaussian_blob, gaussian_mixture, Shift2D, ShiftMode};
    use crate::NufftConfig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn asymmetric(size: usize) -> Image {
        gaussian_mixture(
            size,
            &[
                (Shift2D::new(0.25, 0.1), 0.1, 0.5),
                (Shift2D::new(-0.2, 0.15), 0.15, 0.3),
                (Shift2D::new(0.0, -0.3), 0.08, 0.2),
            ],
        )
        .unwrap()
    }

    trait Rot {
        fn rot(&self, angle: f64) -> Image;
    }

    impl Rot for Image {
        fn rot(&self, angle: f64) -> Image {
            self.apply_rotation(angle).normalize_to_probability(true).unwrap()
        }
    }

    fn random_image(size: usize, rng: &mut ChaCha8Rng) -> Image {
        Image::from_fn(size, |_, _| rng.random::<f64>())
            .normalize_to_probability(false)
            .unwrap()
    }

    #[test]
    fn profile_constructor_clamps_and_breaks_ties() {
        let p = RotationProfile::from_values(vec![0.5, -1e-12, 0.3, 0.0]).unwrap();
        assert_eq!(p.values()[1], 0.0);
        assert_eq!(p.argmin(), 1);
        assert!((p.best_angle() - TAU / 4.0).abs() < 1e-15);
        assert!(RotationProfile::from_values(vec![f64::NAN]).is_err());
    }

    #[test]
    fn self_alignment_is_zero_at_angle_zero() {
        let f = asymmetric(32);
        for kind in [MetricKind::Sw2, MetricKind::Rfsw2, MetricKind::Euclidean, MetricKind::MaxSw2] {
            let r = align(&f, &f, Metric::new(kind, 32)).unwrap();
            assert_eq!(r.angle, 0.0, "{kind}");
            assert!(r.value <= 1e-12, "{kind}: {}", r.value);
        }
        let sino = rotation_profile_euclidean(&f, &f, 32, EuclideanMode::Sino).unwrap();
        assert_eq!(sino.argmin(), 0);
    }

    #[test]
    fn planted_grid_rotation_is_recovered() {
        let n = 48;
        let f = asymmetric(48);
        for l0 in [5usize, 12, 31] {
            let g = f.rot(TAU * l0 as f64 / n as f64);
            let cfg = NufftConfig::default();
            assert_eq!(rotation_profile_sw2(&f, &g, n, cfg).unwrap().argmin(), l0);
            assert_eq!(rotation_profile_rfsw2(&f, &g, n, cfg).unwrap().argmin(), l0);
            let e = rotation_profile_euclidean(&f, &g, n, EuclideanMode::Exact).unwrap();
            assert_eq!(e.argmin(), l0);
        }
    }

    #[test]
    fn quarter_turns_are_exact_for_every_metric() {
        let f = asymmetric(32);
        let g = f.rot(std::f64::consts::FRAC_PI_2);
        for kind in [MetricKind::Sw2, MetricKind::Rfsw2, MetricKind::Euclidean, MetricKind::MaxSw2] {
            let r = align(&f, &g, Metric::new(kind, 32)).unwrap();
            assert!((r.angle - std::f64::consts::FRAC_PI_2).abs() < 1e-12, "{kind}");
        }
    }

    #[test]
    fn fft_profiles_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in [16usize, 25, 40] {
            let f = random_image(24, &mut rng);
            let g = random_image(24, &mut rng);
            for kind in [MetricKind::Sw2, MetricKind::Rfsw2, MetricKind::MaxSw2] {
                let m = Metric::new(kind, n);
                let fast = Aligner::new(&f, m).unwrap().profile(&g).unwrap();
                let slow = brute_rotation_profile(&f, &g, m).unwrap();
                let dev = fast.max_relative_deviation(&slow);
                assert!(dev <= 1e-10, "{kind} n={n}: {dev:e}");
            }
        }
    }

    #[test]
    fn sino_euclidean_matches_direct_shifts() {
        let f = asymmetric(24);
        let g = f.apply_shift(Shift2D::from_pixels(2.0, -1.0, 24), ShiftMode::Integer).unwrap();
        let n = 30;
        let t = SlicedTransform::new(24, n, NufftConfig::default()).unwrap();
        let a = t.projector().raw_columns(&f, SliceFilter::None).unwrap();
        let b = t.projector().raw_columns(&g, SliceFilter::None).unwrap();
        let direct: Vec<f64> = shifted_gaps_direct(&Columns::dense(24, n, &a), &Columns::dense(24, n, &b))
            .unwrap()
            .into_iter()
            .map(|x| x.0)
            .collect();
        let fast = rotation_profile_euclidean(&f, &g, n, EuclideanMode::Sino).unwrap();
        let slow = RotationProfile::from_values(direct).unwrap();
        assert!(fast.max_relative_deviation(&slow) <= 1e-10);
    }

    #[test]
    fn empty_ramp_columns_are_masked_consistently() {
        let u_data = vec![0.1, 0.2, 0.0, 0.0, 0.3, 0.5];
        let v_data = vec![0.2, 0.4, 0.1, 0.3, 0.0, 0.0];
        let u = Columns {
            size: 2,
            n: 3,
            data: &u_data,
            present: vec![true, false, true],
        };
        let v = Columns {
            size: 2,
            n: 3,
            data: &v_data,
            present: vec![true, true, false],
        };
        let fast = shifted_gaps_fft(&u, &v).unwrap();
        let slow = shifted_gaps_direct(&u, &v).unwrap();
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b.0).abs() < 1e-14, "{a} {}", b.0);
        }
    }

    #[test]
    fn swapping_arguments_reverses_the_profile() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = random_image(20, &mut rng);
        let g = random_image(20, &mut rng);
        let n = 24;
        let cfg = NufftConfig::default();
        let ab = rotation_profile_sw2(&f, &g, n, cfg).unwrap();
        let ba = rotation_profile_sw2(&g, &f, n, cfg).unwrap();
        for l in 0..n {
            let a = ab.values()[l];
            let b = ba.values()[(n - l) % n];
            assert!((a - b).abs() <= 1e-10 * a.max(1e-300));
        }
    }

    #[test]
    fn argmin_moves_with_extra_rotation() {
        let n = 40;
        let f = asymmetric(40);
        let g = f.rot(TAU * 7.0 / n as f64);
        let base = rotation_profile_sw2(&f, &g, n, NufftConfig::default()).unwrap().argmin();
        for extra in [3usize, 10, 22] {
            let h = g.rot(TAU * extra as f64 / n as f64);
            let l = rotation_profile_sw2(&f, &h, n, NufftConfig::default()).unwrap().argmin();
            let expect = (base + extra) % n;
            let off = (l as i64 - expect as i64).rem_euclid(n as i64);
            assert!(off <= 1 || off == n as i64 - 1, "{l} vs {expect}");
        }
    }

    #[test]
    fn sinkhorn_brute_profile_finds_planted_rotation() {
        let f = asymmetric(16);
        let n = 16;
        let g = f.rot(TAU * 4.0 / n as f64);
        let p = brute_rotation_profile(&f, &g, Metric::new(MetricKind::Sinkhorn, n)).unwrap();
        assert_eq!(p.argmin(), 4);
        assert!(matches!(
            align(&f, &g, Metric::new(MetricKind::Sinkhorn, n)),
            Err(Error::UnsupportedMetric(_))
        ));
        assert!(matches!(
            brute_rotation_profile(&f, &g, Metric::new(MetricKind::Sw2, 513)),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn centered_blob_profile_is_flat() {
        let f = gaussian_blob(32, Shift2D::default(), 0.2).unwrap();
        let p = rotation_profile_sw2(&f, &f, 32, NufftConfig::default()).unwrap();
        assert!(p.values().iter().all(|v| *v < 1e-10));
    }
}
