//! Square images on `[-1, 1]^2`, normalization to probability measures, and
//! the geometric and noise perturbations used by the experiments.
//!
//! Storage is row-major: row index = y, column index = x. Pixel `i` along
//! either axis has its center at `-1 + (i + 0.5) h` with `h = 2 / L`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft2::{signed_bin, Fft2};

/// Relative threshold below which negative entries are treated as round-off.
pub const NEGATIVE_CLAMP_RTOL: f64 = 1e-12;

/// SNR at or above which no noise is added.
pub const NOISELESS_SNR: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    size: usize,
    data: Vec<f64>,
    probability: bool,
}

impl Image {
    pub fn new(size: usize, data: Vec<f64>) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidParameter("image size must be positive".into()));
        }
        if data.len() != size * size {
            return Err(Error::LengthMismatch(data.len(), size * size));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            size,
            data,
            probability: false,
        })
    }

    pub fn zeros(size: usize) -> Self {
        Self {
            size,
            data: vec![0.0; size * size],
            probability: false,
        }
    }

    /// Builds an image from a function of `(row, col)`.
    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(size * size);
        for r in 0..size {
            for c in 0..size {
                data.push(f(r, c));
            }
        }
        Self {
            size,
            data,
            probability: false,
        }
    }

    /// Builds an image from a function of the pixel-center coordinates `(x, y)`.
    pub fn from_coords(size: usize, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let h = 2.0 / size as f64;
        Self::from_fn(size, |r, c| {
            f(-1.0 + (c as f64 + 0.5) * h, -1.0 + (r as f64 + 0.5) * h)
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.size + col]
    }

    pub fn pixel_width(&self) -> f64 {
        2.0 / self.size as f64
    }

    /// Center coordinate of pixel index `i` along either axis.
    pub fn coord(&self, i: usize) -> f64 {
        -1.0 + (i as f64 + 0.5) * self.pixel_width()
    }

    pub fn is_probability(&self) -> bool {
        self.probability
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Center of mass `(x, y)` in domain units.
    pub fn center_of_mass(&self) -> (f64, f64) {
        let total = self.sum();
        let (mut mx, mut my) = (0.0, 0.0);
        for r in 0..self.size {
            for c in 0..self.size {
                let v = self.get(r, c);
                mx += v * self.coord(c);
                my += v * self.coord(r);
            }
        }
        (mx / total, my / total)
    }

    /// Rescales to unit mass after clamping round-off negatives.
    ///
    /// Negatives no larger than `1e-12 * max` are zeroed. Larger negatives are
    /// an error unless `clamp_all` is set, in which case every negative is zeroed.
    pub fn normalize_to_probability(&self, clamp_all: bool) -> Result<Image> {
        let max = self.max();
        if max <= 0.0 {
            return Err(Error::AllZero);
        }
        let threshold = NEGATIVE_CLAMP_RTOL * max;
        let mut data = self.data.clone();
        for v in data.iter_mut() {
            if *v < 0.0 {
                if *v < -threshold && !clamp_all {
                    return Err(Error::NegativeMass {
                        value: *v,
                        threshold,
                    });
                }
                *v = 0.0;
            }
        }
        let total: f64 = data.iter().sum();
        if total <= 0.0 {
            return Err(Error::AllZero);
        }
        if self.probability && (total - 1.0).abs() <= 1e-15 {
            return Ok(self.clone());
        }
        for v in data.iter_mut() {
            *v /= total;
        }
        Ok(Image {
            size: self.size,
            data,
            probability: true,
        })
    }

    pub fn apply_shift(&self, shift: Shift2D, mode: ShiftMode) -> Result<Image> {
        let (px, py) = shift.pixels(self.size);
        let out = match mode {
            ShiftMode::Integer => {
                let (rx, ry) = (px.round(), py.round());
                if (px - rx).abs() > 1e-9 || (py - ry).abs() > 1e-9 {
                    return Err(Error::NonIntegerShift { sx: px, sy: py });
                }
                self.shift_integer(rx as i64, ry as i64)
            }
            ShiftMode::Fourier => self.shift_fourier(px, py),
        };
        Ok(out)
    }

    fn shift_integer(&self, dx: i64, dy: i64) -> Image {
        let n = self.size as i64;
        let mut out = vec![0.0; self.data.len()];
        for r in 0..n {
            let sr = r - dy;
            if !(0..n).contains(&sr) {
                continue;
            }
            for c in 0..n {
                let sc = c - dx;
                if (0..n).contains(&sc) {
                    out[(r * n + c) as usize] = self.data[(sr * n + sc) as usize];
                }
            }
        }
        Image {
            size: self.size,
            data: out,
            probability: false,
        }
    }

    fn shift_fourier(&self, px: f64, py: f64) -> Image {
        let n = self.size;
        let mut buf: Vec<Complex64> = self.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Fft2::new(n, FftDirection::Forward).process(&mut buf);
        let tau = std::f64::consts::TAU;
        for r in 0..n {
            let ky = signed_bin(r, n) as f64;
            for c in 0..n {
                let kx = signed_bin(c, n) as f64;
                let phase = -tau * (kx * px + ky * py) / n as f64;
                buf[r * n + c] *= Complex64::from_polar(1.0, phase);
            }
        }
        Fft2::new(n, FftDirection::Inverse).process(&mut buf);
        let scale = 1.0 / (n * n) as f64;
        Image {
            size: n,
            data: buf.iter().map(|z| z.re * scale).collect(),
            probability: false,
        }
    }

    /// `R_angle g(x) = g(R_angle^T x)` with bilinear interpolation about the grid center.
    /// Quarter turns are exact sample permutations.
    pub fn apply_rotation(&self, angle: f64) -> Image {
        let quarter = angle / std::f64::consts::FRAC_PI_2;
        if (quarter - quarter.round()).abs() < 1e-12 {
            return self.rotate_quarter_turns(quarter.round() as i64);
        }
        let n = self.size;
        let h = self.pixel_width();
        let (s, c) = angle.sin_cos();
        let mut out = Vec::with_capacity(n * n);
        for r in 0..n {
            let y = self.coord(r);
            for col in 0..n {
                let x = self.coord(col);
                let sx = c * x + s * y;
                let sy = -s * x + c * y;
                out.push(self.sample_bilinear((sx + 1.0) / h - 0.5, (sy + 1.0) / h - 0.5));
            }
        }
        Image {
            size: n,
            data: out,
            probability: false,
        }
    }

    fn rotate_quarter_turns(&self, k: i64) -> Image {
        let n = self.size;
        let last = n - 1;
        let k = k.rem_euclid(4);
        let data = (0..n * n)
            .map(|i| {
                let (r, c) = (i / n, i % n);
                match k {
                    0 => self.get(r, c),
                    1 => self.get(last - c, r),
                    2 => self.get(last - r, last - c),
                    _ => self.get(c, last - r),
                }
            })
            .collect();
        Image {
            size: n,
            data,
            probability: self.probability,
        }
    }

    /// Bilinear sample at continuous pixel indices; outside the grid reads as 0.
    fn sample_bilinear(&self, col: f64, row: f64) -> f64 {
        let n = self.size as i64;
        let c0 = col.floor();
        let r0 = row.floor();
        let (fc, fr) = (col - c0, row - r0);
        let (c0, r0) = (c0 as i64, r0 as i64);
        let at = |r: i64, c: i64| {
            if r < 0 || c < 0 || r >= n || c >= n {
                0.0
            } else {
                self.data[(r * n + c) as usize]
            }
        };
        (1.0 - fr) * ((1.0 - fc) * at(r0, c0) + fc * at(r0, c0 + 1))
            + fr * ((1.0 - fc) * at(r0 + 1, c0) + fc * at(r0 + 1, c0 + 1))
    }

    /// Adds white Gaussian noise with variance `mean(img^2) / snr`.
    pub fn add_gaussian_noise(&self, spec: NoiseSpec) -> Image {
        let mut out = Image {
            size: self.size,
            data: self.data.clone(),
            probability: false,
        };
        if spec.snr >= NOISELESS_SNR {
            return out;
        }
        let power = self.data.iter().map(|v| v * v).sum::<f64>() / self.data.len() as f64;
        let sigma = (power / spec.snr).sqrt();
        if sigma == 0.0 {
            return out;
        }
        let normal = Normal::new(0.0, sigma).expect("finite positive sigma");
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        for v in out.data.iter_mut() {
            *v += normal.sample(&mut rng);
        }
        out
    }

    /// Pointwise `(max(img, 0), max(-img, 0))`.
    pub fn split_signed(&self) -> (Image, Image) {
        let pos = self.data.iter().map(|&v| v.max(0.0)).collect();
        let neg = self.data.iter().map(|&v| (-v).max(0.0)).collect();
        (
            Image {
                size: self.size,
                data: pos,
                probability: false,
            },
            Image {
                size: self.size,
                data: neg,
                probability: false,
            },
        )
    }

    /// Centered zero padding; the original sits at offset `floor((new - L) / 2)`.
    pub fn pad_to(&self, new_size: usize) -> Result<Image> {
        if new_size < self.size {
            return Err(Error::ShrinkNotAllowed {
                from: self.size,
                to: new_size,
            });
        }
        let off = (new_size - self.size) / 2;
        let mut data = vec![0.0; new_size * new_size];
        for r in 0..self.size {
            let dst = (r + off) * new_size + off;
            data[dst..dst + self.size].copy_from_slice(&self.data[r * self.size..(r + 1) * self.size]);
        }
        Ok(Image {
            size: new_size,
            data,
            probability: self.probability,
        })
    }

    /// Pointwise `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Image, b: f64) -> Result<Image> {
        if self.size != other.size {
            return Err(Error::SizeMismatch(self.size, other.size));
        }
        Ok(Image {
            size: self.size,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            probability: false,
        })
    }
}

/// Probability-normalized isotropic Gaussian sampled at pixel centers.
pub fn gaussian_blob(size: usize, center: Shift2D, sigma: f64) -> Result<Image> {
    gaussian_mixture(size, &[(center, sigma, 1.0)])
}

/// Probability-normalized mixture of isotropic Gaussians `(center, sigma, weight)`.
pub fn gaussian_mixture(size: usize, components: &[(Shift2D, f64, f64)]) -> Result<Image> {
    if let Some((_, s, _)) = components.iter().find(|(_, s, _)| !(*s > 0.0)) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {s}")));
    }
    let weight_total: f64 = components.iter().map(|(_, _, w)| w).sum();
    Image::from_coords(size, |x, y| {
        components
            .iter()
            .map(|(c, s, w)| {
                let d2 = (x - c.sx).powi(2) + (y - c.sy).powi(2);
                w / (weight_total * s * s) * (-d2 / (2.0 * s * s)).exp()
            })
            .sum()
    })
    .normalize_to_probability(false)
}

/// Translation in domain units; one pixel of an `L`-image is `2 / L`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Shift2D {
    pub sx: f64,
    pub sy: f64,
}

impl Shift2D {
    pub fn new(sx: f64, sy: f64) -> Self {
        Self { sx, sy }
    }

    pub fn from_pixels(px: f64, py: f64, size: usize) -> Self {
        let h = 2.0 / size as f64;
        Self {
            sx: px * h,
            sy: py * h,
        }
    }

    pub fn pixels(&self, size: usize) -> (f64, f64) {
        let k = size as f64 / 2.0;
        (self.sx * k, self.sy * k)
    }

    pub fn norm(&self) -> f64 {
        self.sx.hypot(self.sy)
    }
}

impl std::ops::Neg for Shift2D {
    type Output = Shift2D;
    fn neg(self) -> Shift2D {
        Shift2D::new(-self.sx, -self.sy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftMode {
    /// Exact relocation of samples by whole pixels.
    Integer,
    /// Periodic phase ramp in frequency space.
    Fourier,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    snr: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(snr: f64, seed: u64) -> Result<Self> {
        if !(snr > 0.0) {
            return Err(Error::InvalidParameter(format!("snr must be positive, got {snr}")));
        }
        Ok(Self { snr, seed })
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn asymmetric(n: usize) -> Image {
        Image::from_fn(n, |r, c| (r * n + c) as f64 + 1.0)
    }

    #[test]
    fn constant_image_normalizes_to_uniform() {
        let img = Image::new(4, vec![3.0; 16]).unwrap();
        let p = img.normalize_to_probability(false).unwrap();
        assert!(p.is_probability());
        assert!(p.data().iter().all(|&v| (v - 1.0 / 16.0).abs() < 1e-16));
    }

    #[test]
    fn normalized_image_is_unchanged() {
        let p = asymmetric(5).normalize_to_probability(false).unwrap();
        let q = p.normalize_to_probability(false).unwrap();
        for (a, b) in p.data().iter().zip(q.data()) {
            assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn two_by_two_normalization() {
        let img = Image::new(2, vec![1.0, 3.0, 0.0, 0.0]).unwrap();
        let p = img.normalize_to_probability(false).unwrap();
        assert_eq!(p.data(), &[0.25, 0.75, 0.0, 0.0]);
    }

    #[test]
    fn normalization_errors() {
        assert!(matches!(
            Image::zeros(3).normalize_to_probability(false),
            Err(Error::AllZero)
        ));
        let img = Image::new(2, vec![1.0, -0.5, 0.0, 1.0]).unwrap();
        assert!(matches!(
            img.normalize_to_probability(false),
            Err(Error::NegativeMass { .. })
        ));
        let p = img.normalize_to_probability(true).unwrap();
        assert_eq!(p.data(), &[0.5, 0.0, 0.0, 0.5]);
        // round-off sized negatives are clamped silently
        let img = Image::new(2, vec![1.0, -1e-14, 0.0, 1.0]).unwrap();
        assert_eq!(img.normalize_to_probability(false).unwrap().data()[1], 0.0);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(Image::new(1, vec![f64::NAN]), Err(Error::NonFinite)));
    }

    #[test]
    fn zero_shift_is_identity() {
        let img = asymmetric(6);
        assert_eq!(img.apply_shift(Shift2D::default(), ShiftMode::Integer).unwrap(), img);
        let f = img.apply_shift(Shift2D::default(), ShiftMode::Fourier).unwrap();
        for (a, b) in img.data().iter().zip(f.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn integer_shift_moves_delta() {
        let n = 20;
        let mut d = vec![0.0; n * n];
        d[10 * n + 10] = 1.0;
        let img = Image::new(n, d).unwrap();
        let out = img
            .apply_shift(Shift2D::from_pixels(3.0, 0.0, n), ShiftMode::Integer)
            .unwrap();
        assert_eq!(out.get(10, 13), 1.0);
        assert_eq!(out.sum(), 1.0);
    }

    #[test]
    fn fractional_integer_shift_is_rejected() {
        let img = asymmetric(8);
        let err = img
            .apply_shift(Shift2D::from_pixels(0.5, 0.0, 8), ShiftMode::Integer)
            .unwrap_err();
        assert!(matches!(err, Error::NonIntegerShift { .. }));
    }

    #[test]
    fn fourier_shift_moves_center_of_mass() {
        let n = 64;
        let blob = gaussian_blob(n, Shift2D::default(), 0.12).unwrap();
        let out = blob
            .apply_shift(Shift2D::from_pixels(2.5, 0.0, n), ShiftMode::Fourier)
            .unwrap();
        let (x0, y0) = blob.center_of_mass();
        let (x1, y1) = out.center_of_mass();
        let h = 2.0 / n as f64;
        assert!((x1 - x0 - 2.5 * h).abs() < 1e-6, "{}", x1 - x0);
        assert!((y1 - y0).abs() < 1e-9);
    }

    #[test]
    fn zero_rotation_is_identity() {
        let img = asymmetric(7);
        assert_eq!(img.apply_rotation(0.0), img);
    }

    #[test]
    fn quarter_turn_is_exact_permutation() {
        let img = asymmetric(4);
        let out = img.apply_rotation(std::f64::consts::FRAC_PI_2);
        // out(x, y) = in(y, -x)
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(out.get(r, c), img.get(3 - c, r));
            }
        }
        let full = (0..4).fold(img.clone(), |acc, _| acc.apply_rotation(std::f64::consts::FRAC_PI_2));
        assert_eq!(full, img);
    }

    #[test]
    fn quarter_turn_matches_bilinear_path() {
        // a rotation a hair away from pi/2 takes the interpolating path
        let img = asymmetric(6);
        let exact = img.apply_rotation(std::f64::consts::FRAC_PI_2);
        let near = img.apply_rotation(std::f64::consts::FRAC_PI_2 + 1e-9);
        for (a, b) in exact.data().iter().zip(near.data()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn rotation_direction_is_counterclockwise() {
        // a blob on +x rotated by pi/4 lands at 45 degrees
        let n = 64;
        let blob = gaussian_blob(n, Shift2D::new(0.5, 0.0), 0.08).unwrap();
        let (x, y) = blob.apply_rotation(std::f64::consts::FRAC_PI_4).center_of_mass();
        let r = 0.5 / 2f64.sqrt();
        assert!((x - r).abs() < 5e-3 && (y - r).abs() < 5e-3, "{x} {y}");
    }

    #[test]
    fn centered_gaussian_is_rotation_invariant() {
        let blob = gaussian_blob(128, Shift2D::default(), 0.2).unwrap();
        for angle in [0.3, 1.1, 2.0, 4.4] {
            let rot = blob.apply_rotation(angle);
            let rms = (blob
                .data()
                .iter()
                .zip(rot.data())
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                / blob.data().len() as f64)
                .sqrt();
            assert!(rms < 1e-6, "rms {rms}");
        }
    }

    #[test]
    fn noise_is_deterministic_and_skipped_at_infinite_snr() {
        let img = asymmetric(8);
        let spec = NoiseSpec::new(2.0, 42).unwrap();
        assert_eq!(img.add_gaussian_noise(spec), img.add_gaussian_noise(spec));
        let clean = img.add_gaussian_noise(NoiseSpec::new(1e12, 1).unwrap());
        assert_eq!(clean.data(), img.data());
        assert!(NoiseSpec::new(0.0, 1).is_err());
    }

    #[test]
    fn unit_snr_gives_unit_noise_variance_on_unit_power_image() {
        let img = Image::new(100, vec![1.0; 10_000]).unwrap();
        let noisy = img.add_gaussian_noise(NoiseSpec::new(1.0, 7).unwrap());
        let diffs: Vec<f64> = noisy.data().iter().map(|v| v - 1.0).collect();
        let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (diffs.len() - 1) as f64;
        assert!((var - 1.0).abs() < 0.05, "variance {var}");
    }

    #[test]
    fn split_signed_cases() {
        let img = Image::new(1, vec![2.0]).unwrap();
        let (p, n) = img.split_signed();
        assert_eq!((p.data(), n.data()), (&[2.0][..], &[0.0][..]));
        let img = Image::new(1, vec![-2.0]).unwrap();
        let (p, n) = img.split_signed();
        assert_eq!((p.data(), n.data()), (&[0.0][..], &[2.0][..]));
        let img = Image::new(2, vec![1.0, -2.0, 0.0, 0.0]).unwrap();
        let (p, n) = img.split_signed();
        assert_eq!(p.data(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(n.data(), &[0.0, 2.0, 0.0, 0.0]);
    }

    #[test]
    fn blob_symmetry_and_mass() {
        let blob = gaussian_blob(32, Shift2D::default(), 0.3).unwrap();
        assert!((blob.sum() - 1.0).abs() < 1e-12);
        for r in 0..32 {
            for c in 0..32 {
                assert!((blob.get(r, c) - blob.get(r, 31 - c)).abs() < 1e-18);
                assert!((blob.get(r, c) - blob.get(31 - r, c)).abs() < 1e-18);
            }
        }
    }

    #[test]
    fn blob_center_of_mass_tracks_center() {
        let n = 48;
        let h = 2.0 / n as f64;
        for (cx, cy, s) in [(0.1, -0.2, 0.2), (-0.3, 0.05, 0.1), (0.0, 0.4, 0.15)] {
            let blob = gaussian_blob(n, Shift2D::new(cx, cy), s).unwrap();
            let (x, y) = blob.center_of_mass();
            assert!((x - cx).abs() < h / 10.0 && (y - cy).abs() < h / 10.0);
        }
    }

    #[test]
    fn shifted_blob_equals_blob_at_shifted_center() {
        let n = 64;
        let s = Shift2D::from_pixels(3.0, -2.0, n);
        let a = gaussian_blob(n, Shift2D::new(0.05, 0.0), 0.12).unwrap();
        let b = gaussian_blob(n, Shift2D::new(0.05 + s.sx, s.sy), 0.12).unwrap();
        let shifted = a.apply_shift(s, ShiftMode::Integer).unwrap();
        for (x, y) in shifted.data().iter().zip(b.data()) {
            assert!((x - y).abs() < 1e-6);
        }
        let shifted = a
            .apply_shift(Shift2D::from_pixels(2.5, 0.0, n), ShiftMode::Fourier)
            .unwrap();
        let b = gaussian_blob(n, Shift2D::new(0.05 + 2.5 * 2.0 / n as f64, 0.0), 0.12).unwrap();
        for (x, y) in shifted.data().iter().zip(b.data()) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn padding() {
        let img = asymmetric(3);
        assert_eq!(img.pad_to(3).unwrap(), img);
        let digit = Image::from_fn(28, |r, c| ((r + c) % 5) as f64);
        let padded = digit.pad_to(39).unwrap();
        assert_eq!(padded.size(), 39);
        for r in 0..28 {
            for c in 0..28 {
                assert_eq!(padded.get(r + 5, c + 5), digit.get(r, c));
            }
        }
        assert!((padded.sum() - digit.sum()).abs() <= 1e-15 * digit.sum());
        assert!(matches!(img.pad_to(2), Err(Error::ShrinkNotAllowed { .. })));
    }

    proptest! {
        #[test]
        fn split_reconstructs_exactly(v in proptest::collection::vec(-1e3f64..1e3, 16)) {
            let img = Image::new(4, v).unwrap();
            let (p, n) = img.split_signed();
            for i in 0..16 {
                prop_assert_eq!(p.data()[i] - n.data()[i], img.data()[i]);
            }
        }

        #[test]
        fn integer_shift_round_trip(dx in -3i64..=3, dy in -3i64..=3, v in proptest::collection::vec(0.0f64..1.0, 36)) {
            // support confined to the interior 6x6 block of a 12x12 grid
            let inner = Image::new(6, v).unwrap();
            let img = inner.pad_to(12).unwrap();
            let s = Shift2D::from_pixels(dx as f64, dy as f64, 12);
            let back = img
                .apply_shift(s, ShiftMode::Integer).unwrap()
                .apply_shift(-s, ShiftMode::Integer).unwrap();
            prop_assert_eq!(back.data(), img.data());
        }

        #[test]
        fn normalize_is_idempotent(v in proptest::collection::vec(0.0f64..10.0, 9)) {
            prop_assume!(v.iter().any(|&x| x > 0.0));
            let p = Image::new(3, v).unwrap().normalize_to_probability(false).unwrap();
            let q = p.normalize_to_probability(false).unwrap();
            for (a, b) in p.data().iter().zip(q.data()) {
                prop_assert!((a - b).abs() <= 1e-15);
            }
        }
    }
}
