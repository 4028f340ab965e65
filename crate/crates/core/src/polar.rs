//! Discrete Radon transforms through the Fourier slice theorem.
//!
//! For each angle `theta_k` the 2-D spectrum of the image is sampled along the
//! central line `omega_m (cos theta_k, sin theta_k)` with `omega_m = m pi`, using
//! the type-2 NUFFT. A length-`L` inverse DFT of each line then gives the line
//! projection at the pixel-center offsets `t_j = -1 + (j + 1/2) h`, which is the
//! Fourier-series representation of the projection on the period-2 interval.
//!
//! Spectra use the mass convention: entry `(m, k)` is
//! `sum_p F[p] exp(-i xi_mk . x_p)`, so the DC term of a probability image is 1.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::io::Grid;
use crate::nufft::{Nufft2d, NufftConfig};

/// Slice mass at or below which a projection counts as empty.
pub const EMPTY_MASS: f64 = 1e-14;

/// Radial frequencies `m pi` for centered `m`, crossed with a set of angles.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    size: usize,
    angles: Vec<f64>,
}

impl PolarGrid {
    /// Equispaced angles `2 pi k / n` on `[0, 2 pi)`.
    pub fn new(size: usize, n_angles: usize) -> Result<Self> {
        if n_angles == 0 {
            return Err(Error::InvalidParameter("need at least one angle".into()));
        }
        let angles = (0..n_angles)
            .map(|k| std::f64::consts::TAU * k as f64 / n_angles as f64)
            .collect();
        Self::with_angles(size, angles)
    }

    pub fn with_angles(size: usize, angles: Vec<f64>) -> Result<Self> {
        if size < 2 {
            return Err(Error::InvalidParameter(format!("slice length {size} < 2")));
        }
        if angles.is_empty() {
            return Err(Error::InvalidParameter("need at least one angle".into()));
        }
        Ok(Self { size, angles })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn n_angles(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Centered radial mode `m` of row `i`: `i - floor(L/2)`.
    pub fn mode(&self, i: usize) -> i64 {
        i as i64 - (self.size / 2) as i64
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.size)
            .map(|i| self.mode(i) as f64 * std::f64::consts::PI)
            .collect()
    }

    /// Flattened frequency points `xi`, angle-major.
    pub fn points(&self) -> Vec<[f64; 2]> {
        let freqs = self.frequencies();
        self.angles
            .iter()
            .flat_map(|&t| {
                let (s, c) = t.sin_cos();
                freqs.iter().map(move |&w| [w * c, w * s])
            })
            .collect()
    }
}

pub fn build_polar_grid(size: usize, n_angles: usize) -> Result<PolarGrid> {
    PolarGrid::new(size, n_angles)
}

/// Complex `L x n` matrix of central-slice samples, one contiguous column per angle.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl SliceMatrix {
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[col * self.rows + row]
    }

    pub fn column(&self, col: usize) -> &[Complex64] {
        &self.data[col * self.rows..(col + 1) * self.rows]
    }

    /// Max over columns of the relative l2 deviation from `reference`.
    pub fn max_relative_deviation(&self, reference: &SliceMatrix) -> f64 {
        (0..self.cols)
            .map(|k| {
                let (num, den) = self
                    .column(k)
                    .iter()
                    .zip(reference.column(k))
                    .fold((0.0, 0.0), |(n, d), (a, b)| (n + (a - b).norm_sqr(), d + b.norm_sqr()));
                if den == 0.0 {
                    num.sqrt()
                } else {
                    (num / den).sqrt()
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Nonnegative `L x n` matrix whose columns are discrete 1-D densities.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    size: usize,
    n_angles: usize,
    extent: f64,
    data: Vec<f64>,
    empty: Vec<bool>,
}

impl Sinogram {
    /// Builds from raw column-major values; negatives are zeroed and each
    /// column rescaled to unit mass. Columns without mass are flagged empty.
    pub fn from_columns(size: usize, n_angles: usize, mut data: Vec<f64>) -> Result<Self> {
        if data.len() != size * n_angles {
            return Err(Error::LengthMismatch(data.len(), size * n_angles));
        }
        let mut empty = vec![false; n_angles];
        for (k, col) in data.chunks_exact_mut(size).enumerate() {
            let mass = normalize_column(col);
            empty[k] = mass <= EMPTY_MASS;
        }
        Ok(Self {
            size,
            n_angles,
            extent: 1.0,
            data,
            empty,
        })
    }

    /// Same columns, read as living on `[-extent, extent]` instead of `[-1, 1]`.
    pub fn with_extent(mut self, extent: f64) -> Self {
        self.extent = extent;
        self
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Half-width of the offset interval covered by the rows.
    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn n_angles(&self) -> usize {
        self.n_angles
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, k: usize) -> &[f64] {
        &self.data[k * self.size..(k + 1) * self.size]
    }

    pub fn is_empty_column(&self, k: usize) -> bool {
        self.empty[k]
    }

    pub fn empty_flags(&self) -> &[bool] {
        &self.empty
    }

    /// Errors on the first empty column.
    fn require_nonempty(self, masses: &[f64]) -> Result<Self> {
        if let Some(k) = self.empty.iter().position(|&e| e) {
            return Err(Error::EmptySlice {
                index: k,
                mass: masses[k],
            });
        }
        Ok(self)
    }

    /// Rows = offsets, cols = angles, for SWIM dumps.
    pub fn to_grid(&self) -> Grid {
        let mut data = vec![0.0; self.data.len()];
        for k in 0..self.n_angles {
            for j in 0..self.size {
                data[j * self.n_angles + k] = self.data[k * self.size + j];
            }
        }
        Grid {
            rows: self.size,
            cols: self.n_angles,
            data,
        }
    }
}

/// Ramp-filtered projections split into normalized positive and negative parts.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedSinogram {
    pub pos: Sinogram,
    pub neg: Sinogram,
    /// L1 masses of the positive parts before normalization.
    pub pos_mass: Vec<f64>,
    /// L1 masses of the negative parts before normalization.
    pub neg_mass: Vec<f64>,
}

/// Zeroes negatives and rescales to unit sum; returns the pre-normalization mass.
fn normalize_column(col: &mut [f64]) -> f64 {
    let mut mass = 0.0;
    for v in col.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
        mass += *v;
    }
    if mass > EMPTY_MASS {
        col.iter_mut().for_each(|v| *v /= mass);
    } else {
        col.iter_mut().for_each(|v| *v = 0.0);
    }
    mass
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceFilter {
    None,
    /// Multiply each radial sample by `|omega|`.
    Ramp,
}

/// Reusable plan for projecting `L x L` images onto a fixed polar grid.
///
/// With padding `P > 1` the slices are sampled `P` times more densely in
/// frequency, so the projections come out as `P L` bins of width `h` on
/// `[-P, P]`. Ramp-filtered projections have slowly decaying tails that would
/// otherwise wrap around the period-2 interval.
#[derive(Clone)]
pub struct Projector {
    grid: PolarGrid,
    padding: usize,
    nufft: Nufft2d,
    targets: Vec<[f64; 2]>,
    target_phase: Vec<Complex64>,
    line_phase: Vec<Complex64>,
    ifft: Arc<dyn Fft<f64>>,
    noise_floor: f64,
}

impl Projector {
    pub fn new(grid: PolarGrid, cfg: NufftConfig) -> Result<Self> {
        Self::padded(grid, cfg, 1)
    }

    pub fn padded(grid: PolarGrid, cfg: NufftConfig, padding: usize) -> Result<Self> {
        if padding == 0 {
            return Err(Error::InvalidParameter("padding must be positive".into()));
        }
        let size = grid.size();
        let len = size * padding;
        let h = 2.0 / size as f64;
        // pixel centers sit at h (i - floor(L/2) + delta) relative to the origin
        let delta = (size / 2) as f64 - (size as f64 - 1.0) / 2.0;
        let modes: Vec<f64> = (0..len).map(|i| i as f64 - (len / 2) as f64).collect();
        let targets: Vec<[f64; 2]> = grid
            .angles()
            .iter()
            .flat_map(|&t| {
                let (s, c) = t.sin_cos();
                modes.iter().map(move |&m| {
                    let k = h * m * std::f64::consts::PI / padding as f64;
                    [k * c, k * s]
                })
            })
            .collect();
        let target_phase = targets
            .iter()
            .map(|[x, y]| Complex64::from_polar(1.0, -(x + y) * delta))
            .collect();
        // Fourier-series coefficient on the period-2P interval, re-centred onto the bin centers
        let center = (len as f64 - 1.0) / 2.0;
        let line_phase = modes
            .iter()
            .map(|&m| {
                Complex64::from_polar(
                    0.5 * h / padding as f64,
                    -std::f64::consts::TAU * m * center / len as f64,
                )
            })
            .collect();
        Ok(Self {
            nufft: Nufft2d::new(size, cfg)?,
            ifft: FftPlanner::new().plan_fft_inverse(len),
            noise_floor: cfg.eps,
            grid,
            padding,
            targets,
            target_phase,
            line_phase,
        })
    }

    pub fn with_angles(size: usize, n_angles: usize, cfg: NufftConfig) -> Result<Self> {
        Self::new(PolarGrid::new(size, n_angles)?, cfg)
    }

    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    pub fn padding(&self) -> usize {
        self.padding
    }

    /// Number of offset bins per projection, `P L`.
    pub fn slice_len(&self) -> usize {
        self.grid.size() * self.padding
    }

    fn check(&self, img: &Image) -> Result<()> {
        if img.size() != self.grid.size() {
            return Err(Error::SizeMismatch(img.size(), self.grid.size()));
        }
        Ok(())
    }

    pub fn slices(&self, img: &Image) -> Result<SliceMatrix> {
        self.check(img)?;
        let mut data = self.nufft.type2(img.data(), &self.targets);
        for (v, p) in data.iter_mut().zip(&self.target_phase) {
            *v *= p;
        }
        Ok(SliceMatrix {
            rows: self.slice_len(),
            cols: self.grid.n_angles(),
            data,
        })
    }

    /// Real line projections in mass-per-bin units, before any clamping.
    pub fn raw_columns(&self, img: &Image, filter: SliceFilter) -> Result<Vec<f64>> {
        let slices = self.slices(img)?;
        Ok(self.columns_from_slices(&slices, filter))
    }

    pub fn columns_from_slices(&self, slices: &SliceMatrix, filter: SliceFilter) -> Vec<f64> {
        let size = self.slice_len();
        let half = (size / 2) as i64;
        let mut out = vec![0.0; size * slices.cols];
        let mut line = vec![Complex64::default(); size];
        let mut scratch = vec![Complex64::default(); self.ifft.get_inplace_scratch_len()];
        for k in 0..slices.cols {
            for (i, v) in slices.column(k).iter().enumerate() {
                let gain = match filter {
                    SliceFilter::None => 1.0,
                    SliceFilter::Ramp => {
                        (i as i64 - half).abs() as f64 * std::f64::consts::PI / self.padding as f64
                    }
                };
                let bin = (i as i64 - half).rem_euclid(size as i64) as usize;
                line[bin] = v * self.line_phase[i] * gain;
            }
            self.ifft.process_with_scratch(&mut line, &mut scratch);
            for (o, z) in out[k * size..(k + 1) * size].iter_mut().zip(&line) {
                *o = z.re;
            }
        }
        out
    }

    /// Zeroes entries within the transform's error of zero, so that round-off
    /// in the tails does not move the support edges seen by the quantiles.
    fn suppress_noise(&self, raw: &mut [f64]) {
        for col in raw.chunks_exact_mut(self.slice_len()) {
            let floor = self.noise_floor * col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            col.iter_mut().filter(|v| v.abs() <= floor).for_each(|v| *v = 0.0);
        }
    }

    pub fn sinogram(&self, img: &Image) -> Result<Sinogram> {
        require_probability(img)?;
        let mut raw = self.raw_columns(img, SliceFilter::None)?;
        self.suppress_noise(&mut raw);
        let size = self.slice_len();
        let masses = positive_masses(&raw, size);
        Ok(Sinogram::from_columns(size, self.grid.n_angles(), raw)?
            .require_nonempty(&masses)?
            .with_extent(self.padding as f64))
    }

    pub fn ramp_sinogram(&self, img: &Image) -> Result<SignedSinogram> {
        require_probability(img)?;
        let mut raw = self.raw_columns(img, SliceFilter::Ramp)?;
        self.suppress_noise(&mut raw);
        let neg_raw: Vec<f64> = raw.iter().map(|v| -v).collect();
        let size = self.slice_len();
        let n = self.grid.n_angles();
        let extent = self.padding as f64;
        Ok(SignedSinogram {
            pos_mass: positive_masses(&raw, size),
            neg_mass: positive_masses(&neg_raw, size),
            pos: Sinogram::from_columns(size, n, raw)?.with_extent(extent),
            neg: Sinogram::from_columns(size, n, neg_raw)?.with_extent(extent),
        })
    }
}

fn positive_masses(raw: &[f64], size: usize) -> Vec<f64> {
    raw.chunks_exact(size)
        .map(|c| c.iter().filter(|v| **v > 0.0).sum())
        .collect()
}

fn require_probability(img: &Image) -> Result<()> {
    if !img.is_probability() {
        return Err(Error::InvalidParameter(
            "image must be normalized to a probability measure".into(),
        ));
    }
    Ok(())
}

pub fn nufft_polar_slices(img: &Image, grid: &PolarGrid, cfg: NufftConfig) -> Result<SliceMatrix> {
    Projector::new(grid.clone(), cfg)?.slices(img)
}

/// Direct summation of the same quadrature as [`nufft_polar_slices`].
pub fn nudft_polar_slices(img: &Image, grid: &PolarGrid) -> Result<SliceMatrix> {
    const LIMIT: usize = 256;
    let size = img.size();
    if size > LIMIT {
        return Err(Error::TooLarge {
            what: "direct polar transform",
            size,
            limit: LIMIT,
        });
    }
    if size != grid.size() {
        return Err(Error::SizeMismatch(size, grid.size()));
    }
    let coords: Vec<f64> = (0..size).map(|i| img.coord(i)).collect();
    let data = grid
        .points()
        .par_iter()
        .map(|&[xi_x, xi_y]| {
            // separable: sum_r e^{-i xi_y y_r} sum_c F[r,c] e^{-i xi_x x_c}
            let ex: Vec<Complex64> = coords.iter().map(|&x| Complex64::from_polar(1.0, -xi_x * x)).collect();
            let mut acc = Complex64::default();
            for (r, &y) in coords.iter().enumerate() {
                let row = &img.data()[r * size..(r + 1) * size];
                let inner: Complex64 = row.iter().zip(&ex).map(|(f, e)| e * f).sum();
                acc += inner * Complex64::from_polar(1.0, -xi_y * y);
            }
            acc
        })
        .collect();
    Ok(SliceMatrix {
        rows: size,
        cols: grid.n_angles(),
        data,
    })
}

pub fn sinogram(img: &Image, n_angles: usize, cfg: NufftConfig) -> Result<Sinogram> {
    Projector::with_angles(img.size(), n_angles, cfg)?.sinogram(img)
}

pub fn ramp_sinogram(img: &Image, n_angles: usize, cfg: NufftConfig) -> Result<SignedSinogram> {
    Projector::with_angles(img.size(), n_angles, cfg)?.ramp_sinogram(img)
}

/// Spatial-domain oracle: rotate by `-theta_k` (bilinear) and sum along y.
pub fn brute_radon(img: &Image, n_angles: usize) -> Result<Sinogram> {
    const LIMIT: usize = 512;
    let size = img.size();
    if size > LIMIT {
        return Err(Error::TooLarge {
            what: "spatial Radon transform",
            size,
            limit: LIMIT,
        });
    }
    let grid = PolarGrid::new(size, n_angles)?;
    let columns: Vec<Vec<f64>> = grid
        .angles()
        .par_iter()
        .map(|&t| {
            let rot = img.apply_rotation(-t);
            (0..size)
                .map(|c| (0..size).map(|r| rot.get(r, c)).sum())
                .collect()
        })
        .collect();
    let raw: Vec<f64> = columns.into_iter().flatten().collect();
    let masses = positive_masses(&raw, size);
    Sinogram::from_columns(size, n_angles, raw)?.require_nonempty(&masses)
}
