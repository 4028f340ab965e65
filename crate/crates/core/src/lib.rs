//! Rotational alignment of images through sliced optimal transport.

pub mod error;
pub mod fft2;
pub mod image;
pub mod io;
pub mod nufft;
pub mod polar;
pub mod quantile;
pub mod metrics;
pub mod transport;
pub mod rotation;
pub mod tomo;

pub use error::{Error, Result};
pub use image::{Image, NoiseSpec, Shift2D, ShiftMode};
pub use nufft::NufftConfig;
pub use metrics::{Metric, MetricKind};
pub use rotation::{align, AlignmentResult, Aligner, EuclideanMode, RotationProfile};
pub use polar::{PolarGrid, Projector, Sinogram, SignedSinogram, SliceMatrix};
