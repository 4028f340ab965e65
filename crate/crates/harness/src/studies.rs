//! Synthetic studies: translation law, rotation recovery, viewing-angle sweep
//! and discretization convergence.

use rayon::prelude::*;
use serde::Serialize;
use slicealign::image::gaussian_blob;
use slicealign::metrics::{euclidean_squared, quantile_gap, root, sw2_squared, SlicedTransform};
use slicealign::tomo::{self, GaussianComponent, ViewingDirection, Volume};
use slicealign::{Aligner, Image, Metric, MetricKind, NufftConfig, RotationProfile, Shift2D, ShiftMode};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranslationRow {
    pub shift_px: u32,
    /// Shift length in domain units.
    pub shift_norm: f64,
    pub sw2_ratio: f64,
    pub rfsw2_ratio: f64,
    pub euclidean: f64,
}

/// Distances between a centered Gaussian blob and copies shifted right by
/// `1..=max_shift` pixels, each divided by the shift length.
pub fn translation_law(size: usize, sigma: f64, max_shift: u32) -> Result<Vec<TranslationRow>> {
    let f = gaussian_blob(size, Shift2D::default(), sigma)?;
    let t = SlicedTransform::new(size, size, NufftConfig::default())?;
    let fq = t.quantiles(&f)?;
    let (fp, fn_) = t.ramp_quantiles(&f)?;
    (1..=max_shift)
        .into_par_iter()
        .map(|k| {
            let s = Shift2D::from_pixels(k as f64, 0.0, size);
            let g = f.apply_shift(s, ShiftMode::Integer)?.normalize_to_probability(true)?;
            let sw = quantile_gap(&fq, &t.quantiles(&g)?)?;
            let (gp, gn) = t.ramp_quantiles(&g)?;
            let rf = quantile_gap(&fp, &gp)? + quantile_gap(&fn_, &gn)?;
            Ok(TranslationRow {
                shift_px: k,
                shift_norm: s.norm(),
                sw2_ratio: root(sw) / s.norm(),
                rfsw2_ratio: root(rf) / s.norm(),
                euclidean: root(euclidean_squared(&f, &g)?),
            })
        })
        .collect()
}

/// Gaussian blob on the positive x axis. Shifting it right and turning it
/// half a turn puts it on the far side, so the closest rotation back is 180
/// degrees; a blob at the origin would look the same at every rotation.
pub fn stability_fixture(size: usize) -> Result<Image> {
    Ok(gaussian_blob(size, Shift2D::new(0.15, 0.0), 0.09)?)
}

#[derive(Debug, Clone)]
pub struct RotationStudy {
    pub profiles: Vec<(MetricKind, RotationProfile)>,
}

impl RotationStudy {
    pub fn profile(&self, kind: MetricKind) -> Option<&RotationProfile> {
        self.profiles.iter().find(|(k, _)| *k == kind).map(|(_, p)| p)
    }
}

/// `(max - min) / max` of a profile.
pub fn relative_variation(p: &RotationProfile) -> f64 {
    let max = p.values().iter().fold(f64::MIN, |m, v| m.max(*v));
    let min = p.values().iter().fold(f64::MAX, |m, v| m.min(*v));
    if max == 0.0 {
        0.0
    } else {
        (max - min) / max
    }
}

/// Rotation profiles of the fixture against a copy shifted right by `shift_px`
/// and then rotated by `rotation_deg`.
pub fn rotation_stability(size: usize, shift_px: u32, rotation_deg: f64, metrics: &[MetricKind]) -> Result<RotationStudy> {
    let f = stability_fixture(size)?;
    let g = f
        .apply_shift(Shift2D::from_pixels(shift_px as f64, 0.0, size), ShiftMode::Integer)?
        .apply_rotation(rotation_deg.to_radians())
        .normalize_to_probability(true)?;
    let profiles = metrics
        .iter()
        .map(|&k| Ok((k, Aligner::new(&f, Metric::new(k, size))?.profile(&g)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(RotationStudy { profiles })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub seed: u64,
    pub theta_deg: f64,
    pub metric: String,
    pub value_sqrt: f64,
    /// `c theta` with the viewing-angle constant for p = 2.
    pub bound: f64,
}

/// Tilt sweep about the x axis, `0..=max_deg` in one-degree steps, for
/// random 3-component mixtures drawn from each seed.
pub fn viewing_angle_sweep(seeds: &[u64], size: usize, max_deg: u32, metrics: &[MetricKind]) -> Result<Vec<SweepPoint>> {
    let c = tomo::viewing_constant_p2();
    let metrics: Vec<Metric> = metrics.iter().map(|&k| Metric::new(k, size)).collect();
    let mut out = Vec::new();
    for &seed in seeds {
        let vol = Volume::random_mixture(3, seed)?;
        let rows = tomo::viewing_sweep(
            &vol,
            [1.0, 0.0, 0.0],
            (max_deg as f64).to_radians(),
            max_deg as usize + 1,
            size,
            &metrics,
        )?;
        out.extend(rows.into_iter().map(|r| SweepPoint {
            seed,
            bound: c * r.theta_deg.to_radians(),
            theta_deg: r.theta_deg,
            metric: r.metric,
            value_sqrt: r.value_sqrt,
        }));
    }
    Ok(out)
}

/// The two smooth test densities of the convergence study, as 3-D mixtures
/// viewed along `+z`.
pub fn convergence_pair() -> Result<(Volume, Volume)> {
    let comp = |x: f64, y: f64, sigma: f64, weight: f64| GaussianComponent {
        center: [x, y, 0.0],
        sigma,
        weight,
    };
    Ok((
        Volume::mixture(vec![comp(-0.2, 0.1, 0.15, 0.5), comp(0.25, -0.1, 0.12, 0.5)])?,
        Volume::mixture(vec![comp(0.1, 0.2, 0.14, 0.7), comp(-0.15, -0.25, 0.1, 0.3)])?,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub size: usize,
    pub n_angles: usize,
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub reference_size: usize,
    pub reference_angles: usize,
    pub eps: f64,
    pub reference: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `ln error` against `ln (1/L)`.
    pub slope: f64,
}

pub fn sw2_at(size: usize, n_angles: usize, eps: f64) -> Result<f64> {
    let (a, b) = convergence_pair()?;
    let dir = ViewingDirection::from_tilt(0.0);
    let f = tomo::project(&a, dir, size)?;
    let g = tomo::project(&b, dir, size)?;
    Ok(sw2_squared(&f, &g, n_angles, NufftConfig::with_eps(eps))?)
}

/// Error of the discrete sliced distance at each `(L, n)` against a fine reference.
pub fn convergence_study(reference: (usize, usize), levels: &[(usize, usize)], eps: f64) -> Result<ConvergenceStudy> {
    if levels.len() < 2 {
        return Err(HarnessError::Args("convergence needs at least two levels".into()));
    }
    let value = sw2_at(reference.0, reference.1, eps)?;
    let rows = levels
        .iter()
        .map(|&(size, n)| {
            let v = sw2_at(size, n, eps)?;
            Ok(ConvergenceRow {
                size,
                n_angles: n,
                value: v,
                error: (v - value).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((1.0 / r.size as f64).ln(), r.error.max(f64::MIN_POSITIVE).ln()))
        .collect();
    Ok(ConvergenceStudy {
        reference_size: reference.0,
        reference_angles: reference.1,
        eps,
        reference: value,
        rows,
        slope: fit_slope(&pts),
    })
}

/// Least-squares slope through `(x, y)` points.
pub fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Spacing of an `n`-point rotation grid in degrees.
pub fn angle_step_deg(n: usize) -> f64 {
    360.0 / n as f64
}

/// Circular distance between two angles in degrees.
pub fn degrees_apart(a_deg: f64, b_deg: f64) -> f64 {
    let d = (a_deg - b_deg).rem_euclid(360.0);
    d.min(360.0 - d)
}
