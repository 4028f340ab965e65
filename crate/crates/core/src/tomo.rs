//! Orthographic projection of 3-D densities on the unit ball.
//!
//! A viewing direction `a` and an orthonormal in-plane frame `(e1, e2)` map
//! image coordinates `(x, y)` to the line `x e1 + y e2 + t a`, and the image is
//! the integral of the volume along that line.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::io::VolumeFile;
use crate::metrics::{root, Metric};
use crate::rotation::Aligner;

pub type Vec3 = [f64; 3];

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn unit(a: Vec3) -> Result<Vec3> {
    let n = dot(a, a).sqrt();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::InvalidParameter("direction must be a nonzero finite vector".into()));
    }
    Ok(scale(a, 1.0 / n))
}

/// Rodrigues rotation of `v` about the unit `axis` by `angle`.
fn rotate_about(v: Vec3, axis: Vec3, angle: f64) -> Vec3 {
    let (s, c) = angle.sin_cos();
    add(
        add(scale(v, c), scale(cross(axis, v), s)),
        scale(axis, dot(axis, v) * (1.0 - c)),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub center: Vec3,
    pub sigma: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Volume {
    Mixture(Vec<GaussianComponent>),
    /// Samples on an `m x m x m` grid over `[-1, 1]^3`, indexed `[z][y][x]`.
    Grid { size: usize, data: Vec<f64> },
}

impl Volume {
    /// Isotropic Gaussian mixture; weights must sum to 1 and centers lie in the unit ball.
    pub fn mixture(components: Vec<GaussianComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("mixture needs at least one component".into()));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(total));
        }
        for c in &components {
            if !(c.sigma > 0.0) || c.weight < 0.0 {
                return Err(Error::InvalidParameter(format!("bad component {c:?}")));
            }
            if dot(c.center, c.center) > 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "component center {:?} outside the unit ball",
                    c.center
                )));
            }
        }
        Ok(Volume::Mixture(components))
    }

    /// Random mixture of `k` components well inside the unit ball, weights normalized.
    pub fn random_mixture(k: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut comps: Vec<GaussianComponent> = (0..k)
            .map(|_| {
                let center = loop {
                    let p = [
                        rng.random_range(-0.45..0.45),
                        rng.random_range(-0.45..0.45),
                        rng.random_range(-0.45..0.45),
                    ];
                    if dot(p, p) <= 0.45 * 0.45 {
                        break p;
                    }
                };
                GaussianComponent {
                    center,
                    sigma: rng.random_range(0.06..0.14),
                    weight: rng.random_range(0.2..1.0),
                }
            })
            .collect();
        let total: f64 = comps.iter().map(|c| c.weight).sum();
        comps.iter_mut().for_each(|c| c.weight /= total);
        Self::mixture(comps)
    }

    /// Grid volume from a cubic SWV1 payload. Samples outside the unit ball are
    /// zeroed and the rest rescaled to unit mass.
    pub fn from_file(file: VolumeFile) -> Result<Self> {
        let [d0, d1, d2] = file.dims;
        if d0 != d1 || d1 != d2 || d0 < 2 {
            return Err(Error::Format(format!("volume must be cubic, got {:?}", file.dims)));
        }
        let m = d0;
        let h = 2.0 / m as f64;
        let c = |i: usize| -1.0 + (i as f64 + 0.5) * h;
        let mut data = file.data;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut clipped = 0usize;
        for z in 0..m {
            for y in 0..m {
                for x in 0..m {
                    let v = &mut data[(z * m + y) * m + x];
                    let outside = c(x).powi(2) + c(y).powi(2) + c(z).powi(2) > 1.0;
                    if (outside && *v != 0.0) || *v < 0.0 {
                        clipped += 1;
                        *v = 0.0;
                    }
                }
            }
        }
        if clipped > 0 {
            eprintln!("warning: zeroed {clipped} volume samples outside the unit ball or negative");
        }
        let total: f64 = data.iter().sum();
        if !(total > 0.0) {
            return Err(Error::AllZero);
        }
        data.iter_mut().for_each(|v| *v /= total);
        Ok(Volume::Grid { size: m, data })
    }

    fn sample(&self, p: Vec3) -> f64 {
        match self {
            Volume::Mixture(_) => unreachable!("mixtures are projected analytically"),
            Volume::Grid { size, data } => {
                let m = *size;
                let idx = |v: f64| (v + 1.0) * m as f64 / 2.0 - 0.5;
                let (fx, fy, fz) = (idx(p[0]), idx(p[1]), idx(p[2]));
                let (x0, y0, z0) = (fx.floor(), fy.floor(), fz.floor());
                let (tx, ty, tz) = (fx - x0, fy - y0, fz - z0);
                let at = |x: i64, y: i64, z: i64| -> f64 {
                    if x < 0 || y < 0 || z < 0 || x >= m as i64 || y >= m as i64 || z >= m as i64 {
                        0.0
                    } else {
                        data[(z as usize * m + y as usize) * m + x as usize]
                    }
                };
                let (x0, y0, z0) = (x0 as i64, y0 as i64, z0 as i64);
                let mut acc = 0.0;
                for (dz, wz) in [(0, 1.0 - tz), (1, tz)] {
                    for (dy, wy) in [(0, 1.0 - ty), (1, ty)] {
                        for (dx, wx) in [(0, 1.0 - tx), (1, tx)] {
                            let w = wx * wy * wz;
                            if w != 0.0 {
                                acc += w * at(x0 + dx, y0 + dy, z0 + dz);
                            }
                        }
                    }
                }
                acc
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewingDirection {
    a: Vec3,
}

impl ViewingDirection {
    pub fn new(a: Vec3) -> Result<Self> {
        Ok(Self { a: unit(a)? })
    }

    /// `+z` rotated by `theta` about `axis`.
    pub fn tilted(axis: Vec3, theta: f64) -> Result<Self> {
        Self::new(rotate_about([0.0, 0.0, 1.0], unit(axis)?, theta))
    }

    /// `+z` tilted by `theta` about the x axis: `(0, -sin theta, cos theta)`.
    pub fn from_tilt(theta: f64) -> Self {
        Self {
            a: [0.0, -theta.sin(), theta.cos()],
        }
    }

    pub fn vector(&self) -> Vec3 {
        self.a
    }

    /// In-plane axes: `e1` is the first world axis with `|a . w| <= 0.9`,
    /// orthogonalized against `a`; `e2 = a x e1`.
    pub fn frame(&self) -> (Vec3, Vec3) {
        let axes = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let w = axes
            .into_iter()
            .find(|w| dot(self.a, *w).abs() <= 0.9)
            .expect("a unit vector has a component of at most 1/sqrt(3) along some axis");
        let e1 = unit(add(w, scale(self.a, -dot(self.a, w)))).expect("w is not parallel to a");
        let e2 = cross(self.a, e1);
        (e1, e2)
    }
}

/// Probability-normalized `L x L` projection of `vol` along `dir`.
pub fn project(vol: &Volume, dir: ViewingDirection, size: usize) -> Result<Image> {
    let (e1, e2) = dir.frame();
    project_with_frame(vol, dir, e1, e2, size)
}

/// Projection with a caller-supplied in-plane frame, which must be orthonormal and orthogonal to `dir`.
pub fn project_with_frame(vol: &Volume, dir: ViewingDirection, e1: Vec3, e2: Vec3, size: usize) -> Result<Image> {
    if size < 2 {
        return Err(Error::InvalidParameter(format!("image size {size} < 2")));
    }
    let a = dir.a;
    let tol = 1e-9;
    if (dot(e1, e1) - 1.0).abs() > tol || (dot(e2, e2) - 1.0).abs() > tol || dot(e1, e2).abs() > tol || dot(e1, a).abs() > tol || dot(e2, a).abs() > tol {
        return Err(Error::InvalidParameter("frame is not orthonormal to the direction".into()));
    }
    let h = 2.0 / size as f64;
    let coord = |i: usize| -1.0 + (i as f64 + 0.5) * h;
    let data: Vec<f64> = match vol {
        Volume::Mixture(comps) => {
            // per component, per-axis cell masses of the projected Gaussian
            let cells: Vec<(f64, Vec<f64>, Vec<f64>)> = comps
                .iter()
                .map(|c| {
                    let (cx, cy) = (dot(c.center, e1), dot(c.center, e2));
                    let s = c.sigma * std::f64::consts::SQRT_2;
                    let cell = |center: f64| -> Vec<f64> {
                        (0..size)
                            .map(|i| {
                                let lo = (coord(i) - h / 2.0 - center) / s;
                                let hi = (coord(i) + h / 2.0 - center) / s;
                                0.5 * (libm::erf(hi) - libm::erf(lo))
                            })
                            .collect()
                    };
                    (c.weight, cell(cx), cell(cy))
                })
                .collect();
            (0..size * size)
                .map(|p| {
                    let (r, col) = (p / size, p % size);
                    cells.iter().map(|(w, px, py)| w * px[col] * py[r]).sum()
                })
                .collect()
        }
        Volume::Grid { size: m, .. } => {
            let step = 1.0 / *m as f64;
            let reach = 3f64.sqrt();
            let count = (2.0 * reach / step).ceil() as usize;
            (0..size * size)
                .into_par_iter()
                .map(|p| {
                    let (r, col) = (p / size, p % size);
                    let base = add(scale(e1, coord(col)), scale(e2, coord(r)));
                    (0..=count)
                        .map(|k| vol.sample(add(base, scale(a, -reach + k as f64 * step))))
                        .sum::<f64>()
                        * step
                })
                .collect()
        }
    };
    Image::new(size, data)?.normalize_to_probability(true)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub theta_deg: f64,
    pub metric: String,
    pub value_sqrt: f64,
}

/// For tilts `theta_i` evenly spaced on `[0, theta_max]`, the rotation-minimized
/// distance between the projections at `theta_i` and at zero tilt.
pub fn viewing_sweep(
    vol: &Volume,
    axis: Vec3,
    theta_max: f64,
    steps: usize,
    size: usize,
    metrics: &[Metric],
) -> Result<Vec<SweepRow>> {
    if !(0.0..=FRAC_PI_2).contains(&theta_max) {
        return Err(Error::InvalidParameter(format!("theta_max {theta_max} outside [0, pi/2]")));
    }
    if steps < 2 {
        return Err(Error::InvalidParameter("sweep needs at least two steps".into()));
    }
    let reference = project(vol, ViewingDirection::tilted(axis, 0.0)?, size)?;
    let aligners = metrics
        .iter()
        .map(|m| Aligner::new(&reference, *m))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<SweepRow>> = (0..steps)
        .into_par_iter()
        .map(|i| {
            let theta = theta_max * i as f64 / (steps - 1) as f64;
            let img = project(vol, ViewingDirection::tilted(axis, theta)?, size)?;
            aligners
                .iter()
                .map(|al| {
                    let p = al.profile(&img)?;
                    Ok(SweepRow {
                        theta_deg: theta.to_degrees(),
                        metric: al.metric().kind.name().to_string(),
                        value_sqrt: root(p.best_value()),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// `(1 - 4 / (3 pi))^(1/2)`, the viewing-angle stability constant at p = 2.
pub fn viewing_constant_p2() -> f64 {
    (1.0 - 4.0 / (3.0 * std::f64::consts::PI)).sqrt()
}
