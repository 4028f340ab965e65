//! Dataset ingestion.

use std::path::{Path, PathBuf};

use slicealign::io::{read_idx_images, read_idx_labels, IdxImages};
use slicealign::Image;

use crate::error::{HarnessError, Result};

pub const MNIST_IMAGES: &str = "t10k-images-idx3-ubyte";
pub const MNIST_LABELS: &str = "t10k-labels-idx1-ubyte";
pub const MNIST_DIR_ENV: &str = "SLICEALIGN_MNIST_DIR";

/// Default padded image size for MNIST digits.
pub const MNIST_SIZE: usize = 39;

/// Directory holding the MNIST test files: `$SLICEALIGN_MNIST_DIR` if set,
/// otherwise `data/mnist` under the workspace root.
pub fn mnist_dir() -> PathBuf {
    match std::env::var_os(MNIST_DIR_ENV) {
        Some(dir) => PathBuf::from(dir),
        None => Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist"),
    }
}

/// Paths of the test-set images and labels inside `dir`.
pub fn mnist_files(dir: &Path) -> (PathBuf, PathBuf) {
    (dir.join(MNIST_IMAGES), dir.join(MNIST_LABELS))
}

/// Images of one digit, scaled to `[0, 1]`, normalized to unit mass and
/// zero-padded to `size x size`.
pub fn load_mnist(images_path: &Path, labels_path: &Path, digit: u8, size: usize) -> Result<Vec<Image>> {
    for p in [images_path, labels_path] {
        if !p.exists() {
            return Err(HarnessError::MissingFile(p.display().to_string()));
        }
    }
    let images = read_idx_images(images_path)?;
    let labels = read_idx_labels(labels_path)?;
    select_digit(&images, &labels, digit, size)
}

pub fn select_digit(images: &IdxImages, labels: &[u8], digit: u8, size: usize) -> Result<Vec<Image>> {
    if images.count != labels.len() {
        return Err(HarnessError::CountMismatch {
            images: images.count,
            labels: labels.len(),
        });
    }
    if images.rows != images.cols {
        return Err(HarnessError::DimMismatch {
            rows: images.rows,
            cols: images.cols,
        });
    }
    let out = labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == digit)
        .map(|(i, _)| {
            let px = images.image(i).iter().map(|&b| b as f64 / 255.0).collect();
            Image::new(images.rows, px)?
                .normalize_to_probability(false)?
                .pad_to(size)
                .map_err(HarnessError::from)
        })
        .collect::<Result<Vec<_>>>()?;
    if out.is_empty() {
        return Err(HarnessError::EmptySet(digit));
    }
    Ok(out)
}

/// Image closest in Euclidean distance to the pixelwise mean; ties go to the
/// smallest index.
pub fn pick_reference(images: &[Image]) -> Result<(usize, Image)> {
    let first = images.first().ok_or(HarnessError::NoImages)?;
    let n = first.data().len();
    let mut mean = vec![0.0; n];
    for img in images {
        if img.data().len() != n {
            return Err(slicealign::Error::SizeMismatch(first.size(), img.size()).into());
        }
        for (m, v) in mean.iter_mut().zip(img.data()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= images.len() as f64);
    let mut best = (0, f64::INFINITY);
    for (i, img) in images.iter().enumerate() {
        let d: f64 = img.data().iter().zip(&mean).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best.1 {
            best = (i, d);
        }
    }
    Ok((best.0, images[best.0].clone()))
}
