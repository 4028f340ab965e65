//! Cumulative distributions and quantile functions of 1-D binned densities.
//!
//! A density on `L` bins of width `h = 2/L` covering `[-1, 1]` has a piecewise
//! linear CDF with knots at the bin edges. Quantiles are evaluated at the left
//! Riemann levels `z_j = j/L`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::polar::Sinogram;

const NORMALIZATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteCdf {
    /// Cumulative mass through bin `j`, inclusive.
    values: Vec<f64>,
}

impl DiscreteCdf {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Bin centers `-1 + (j + 1/2) h`.
    pub fn support(&self) -> Vec<f64> {
        let h = 2.0 / self.len() as f64;
        (0..self.len()).map(|j| -1.0 + (j as f64 + 0.5) * h).collect()
    }

    /// Interpolated CDF at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let l = self.len();
        let h = 2.0 / l as f64;
        let x = ((t + 1.0) / h).clamp(0.0, l as f64);
        let b = (x.floor() as usize).min(l - 1);
        let prev = if b == 0 { 0.0 } else { self.values[b - 1] };
        prev + (self.values[b] - prev) * (x - b as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantileKind {
    Plain,
    Pos,
    Neg,
}

/// Quantile function sampled at `z_j = j/L`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileColumn(pub Vec<f64>);

impl QuantileColumn {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// One quantile column per projection angle.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileMatrix {
    size: usize,
    n_angles: usize,
    data: Vec<f64>,
    empty: Vec<bool>,
    kind: QuantileKind,
}

impl QuantileMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn n_angles(&self) -> usize {
        self.n_angles
    }

    pub fn kind(&self) -> QuantileKind {
        self.kind
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
}

pub fn pdf_to_cdf(density: &[f64]) -> Result<DiscreteCdf> {
    if density.is_empty() {
        return Err(Error::InvalidParameter("empty density".into()));
    }
    if density.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if let Some(&v) = density.iter().find(|v| **v < 0.0) {
        return Err(Error::NegativeMass {
            value: v,
            threshold: 0.0,
        });
    }
    let total: f64 = density.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized(total));
    }
    Ok(cumulative(density))
}

fn cumulative(density: &[f64]) -> DiscreteCdf {
    let mut acc = 0.0;
    let values = density
        .iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect();
    DiscreteCdf { values }
}

/// Generalized inverse `inf { t : CDF(t) >= z }` of the interpolated CDF.
pub fn cdf_to_icdf(cdf: &DiscreteCdf) -> QuantileColumn {
    let mut out = vec![0.0; cdf.len()];
    icdf_into(cdf.values(), 1.0, &mut out);
    QuantileColumn(out)
}

/// Quantiles of a CDF over `l` equal bins spanning `[-extent, extent]`.
fn icdf_into(c: &[f64], extent: f64, out: &mut [f64]) {
    let l = c.len();
    let h = 2.0 * extent / l as f64;
    let mut b = 0;
    let mut prev = 0.0;
    for (j, q) in out.iter_mut().enumerate() {
        let z = j as f64 / l as f64;
        // smallest bin carrying mass whose cumulative value reaches z
        while b + 1 < l && (c[b] < z || c[b] <= prev) {
            prev = c[b];
            b += 1;
        }
        let mass = c[b] - prev;
        let frac = if mass > 0.0 {
            ((z - prev) / mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        *q = -extent + (b as f64 + frac) * h;
    }
}

pub fn w2_squared_1d(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch(u.len(), v.len()));
    }
    Ok(squared_gap(u, v) / u.len() as f64)
}

pub(crate) fn squared_gap(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub fn sinogram_quantiles(s: &Sinogram, kind: QuantileKind) -> QuantileMatrix {
    let size = s.size();
    let mut data = vec![0.0; size * s.n_angles()];
    data.par_chunks_mut(size).enumerate().for_each(|(k, out)| {
        if !s.is_empty_column(k) {
            icdf_into(&cumulative(s.column(k)).values, s.extent(), out);
        }
    });
    QuantileMatrix {
        size,
        n_angles: s.n_angles(),
        data,
        empty: s.empty_flags().to_vec(),
        kind,
    }
}
