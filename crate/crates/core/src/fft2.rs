//! Square 2-D FFTs on row-major complex buffers.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

/// A planned 2-D transform of an `n x n` grid in one direction.
#[derive(Clone)]
pub struct Fft2 {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(n: usize, direction: FftDirection) -> Self {
        let fft = FftPlanner::new().plan_fft(n, direction);
        Self { n, fft }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Unnormalized transform in place.
    pub fn process(&self, data: &mut [Complex64]) {
        let n = self.n;
        assert_eq!(data.len(), n * n);
        let mut scratch = vec![Complex64::default(); self.fft.get_inplace_scratch_len()];
        self.fft.process_with_scratch(data, &mut scratch);
        transpose_in_place(data, n);
        self.fft.process_with_scratch(data, &mut scratch);
        transpose_in_place(data, n);
    }
}

fn transpose_in_place(data: &mut [Complex64], n: usize) {
    for r in 0..n {
        for c in (r + 1)..n {
            data.swap(r * n + c, c * n + r);
        }
    }
}

/// Signed frequency of DFT bin `k` for length `n` (bins above `n/2` wrap negative).
pub fn signed_bin(k: usize, n: usize) -> i64 {
    if k < n.div_ceil(2) {
        k as i64
    } else {
        k as i64 - n as i64
    }
}
