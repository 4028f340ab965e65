//! Type-2 non-uniform FFT in two dimensions.
//!
//! Evaluates `S(k) = sum_{r,c} a[r,c] exp(-i (mx(c) kx + my(r) ky))` at arbitrary
//! `k = (kx, ky)` in `[-pi, pi]^2`, with centered mode indices `m(i) = i - floor(n/2)`.
//! The pipeline is the usual gridding scheme: divide the modes by the kernel's
//! Fourier transform, zero-pad to an oversampled grid, FFT, then interpolate at
//! each target with an exponential-of-semicircle kernel.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft2::Fft2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NufftConfig {
    /// Target relative precision.
    pub eps: f64,
    /// Fine-grid oversampling factor.
    pub oversampling: f64,
}

impl Default for NufftConfig {
    fn default() -> Self {
        Self {
            eps: 1e-6,
            oversampling: 2.0,
        }
    }
}

impl NufftConfig {
    pub fn with_eps(eps: f64) -> Self {
        Self {
            eps,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1e-14..=1e-2).contains(&self.eps) {
            return Err(Error::InvalidParameter(format!(
                "nufft eps {} outside [1e-14, 1e-2]",
                self.eps
            )));
        }
        if !(1.25..=4.0).contains(&self.oversampling) {
            return Err(Error::InvalidParameter(format!(
                "nufft oversampling {} outside [1.25, 4]",
                self.oversampling
            )));
        }
        Ok(())
    }

    /// Kernel width in fine-grid points, one more than the kernel's decay rate requires.
    pub fn kernel_width(&self) -> usize {
        let decay = std::f64::consts::PI * (1.0 - 1.0 / self.oversampling).sqrt();
        let w = ((1.0 / self.eps).ln() / decay).ceil() as usize + 1;
        w.clamp(2, 16)
    }

    fn kernel_beta(&self) -> f64 {
        0.97 * std::f64::consts::PI * (1.0 - 0.5 / self.oversampling) * self.kernel_width() as f64
    }
}

/// A planned 2-D type-2 transform for `n x n` mode arrays.
#[derive(Clone)]
pub struct Nufft2d {
    n: usize,
    fine: usize,
    width: usize,
    beta: f64,
    correction: Vec<f64>,
    fft: Fft2,
}

impl Nufft2d {
    pub fn new(n: usize, cfg: NufftConfig) -> Result<Self> {
        cfg.validate()?;
        if n == 0 {
            return Err(Error::InvalidParameter("nufft size must be positive".into()));
        }
        let width = cfg.kernel_width();
        let beta = cfg.kernel_beta();
        let target = ((cfg.oversampling * n as f64).ceil() as usize).max(2 * width);
        let fine = next_smooth(target);
        let spacing = std::f64::consts::TAU / fine as f64;
        let half = width as f64 * spacing / 2.0;
        let (nodes, weights) = gauss_legendre(4 * width + 16);
        let correction = (0..n)
            .map(|i| {
                let k = i as f64 - (n / 2) as f64;
                let ft: f64 = nodes
                    .iter()
                    .zip(&weights)
                    .map(|(&z, &wt)| wt * es_kernel(z, beta) * (k * half * z).cos())
                    .sum::<f64>()
                    * half;
                spacing / ft
            })
            .collect();
        Ok(Self {
            n,
            fine,
            width,
            beta,
            correction,
            fft: Fft2::new(fine, FftDirection::Forward),
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn fine_size(&self) -> usize {
        self.fine
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Evaluates the mode sum of the row-major `n x n` array `coeffs` at `targets`.
    pub fn type2(&self, coeffs: &[f64], targets: &[[f64; 2]]) -> Vec<Complex64> {
        let (n, m) = (self.n, self.fine);
        assert_eq!(coeffs.len(), n * n);
        let half_n = (n / 2) as i64;
        let mut grid = vec![Complex64::default(); m * m];
        for r in 0..n {
            let fr = (r as i64 - half_n).rem_euclid(m as i64) as usize;
            let cr = self.correction[r];
            for c in 0..n {
                let fc = (c as i64 - half_n).rem_euclid(m as i64) as usize;
                grid[fr * m + fc] = Complex64::new(coeffs[r * n + c] * cr * self.correction[c], 0.0);
            }
        }
        self.fft.process(&mut grid);

        let inv_spacing = m as f64 / std::f64::consts::TAU;
        let w = self.width;
        let half_w = w as f64 / 2.0;
        targets
            .par_iter()
            .with_min_len(512)
            .map_init(
                || (vec![0.0; w], vec![0.0; w]),
                |(wx, wy), &[kx, ky]| {
                    let (x0, y0) = (kx * inv_spacing, ky * inv_spacing);
                    let lx = (x0 - half_w).ceil();
                    let ly = (y0 - half_w).ceil();
                    for j in 0..w {
                        wx[j] = es_kernel((x0 - lx - j as f64) / half_w, self.beta);
                        wy[j] = es_kernel((y0 - ly - j as f64) / half_w, self.beta);
                    }
                    let (lx, ly) = (lx as i64, ly as i64);
                    let mut acc = Complex64::default();
                    for (j, &vy) in wy.iter().enumerate() {
                        let row = (ly + j as i64).rem_euclid(m as i64) as usize * m;
                        let mut line = Complex64::default();
                        for (i, &vx) in wx.iter().enumerate() {
                            let col = (lx + i as i64).rem_euclid(m as i64) as usize;
                            line += grid[row + col] * vx;
                        }
                        acc += line * vy;
                    }
                    acc
                },
            )
            .collect()
    }
}

/// Exponential of semicircle, `exp(beta (sqrt(1 - z^2) - 1))` on `|z| <= 1`.
fn es_kernel(z: f64, beta: f64) -> f64 {
    let t = 1.0 - z * z;
    if t <= 0.0 {
        0.0
    } else {
        (beta * (t.sqrt() - 1.0)).exp()
    }
}

/// Smallest `2^a 3^b 5^c` that is even and at least `n`.
fn next_smooth(n: usize) -> usize {
    let mut k = n.max(2);
    loop {
        let mut r = k;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 && k.is_multiple_of(2) {
            return k;
        }
        k += 1;
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, `q >= 2`.
pub(crate) fn gauss_legendre(q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    for i in 0..q.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=q {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = q as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[q - 1 - i] = x;
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    (nodes, weights)
}
