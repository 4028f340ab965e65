#![allow(dead_code)]

use std::path::Path;

use harness::data::{MNIST_IMAGES, MNIST_LABELS};

/// Writes a small t10k-style IDX pair: `count` blurred strokes of side
/// `side`, labelled alternately 2 and 7.
pub fn write_fake_mnist(dir: &Path, count: usize, side: usize) {
    let mut images = Vec::new();
    images.extend_from_slice(&0x0000_0803u32.to_be_bytes());
    for d in [count, side, side] {
        images.extend_from_slice(&(d as u32).to_be_bytes());
    }
    let mut labels = Vec::new();
    labels.extend_from_slice(&0x0000_0801u32.to_be_bytes());
    labels.extend_from_slice(&(count as u32).to_be_bytes());
    for i in 0..count {
        let c = side as f64 / 2.0;
        let tilt = 0.3 + 0.05 * i as f64;
        for r in 0..side {
            for col in 0..side {
                let (y, x) = (r as f64 - c, col as f64 - c);
                // an off-center bar plus a blob, so the image has a clear orientation
                let bar = (-(y - tilt * x).powi(2) / 2.0).exp() * (x > -c / 2.0 && x < c / 1.5) as u8 as f64;
                let blob = (-((x - c / 2.0).powi(2) + (y + c / 3.0).powi(2)) / 3.0).exp();
                images.push((255.0 * (bar + blob).min(1.0)) as u8);
            }
        }
        labels.push(if i % 2 == 0 { 2 } else { 7 });
    }
    std::fs::write(dir.join(MNIST_IMAGES), images).unwrap();
    std::fs::write(dir.join(MNIST_LABELS), labels).unwrap();
}
