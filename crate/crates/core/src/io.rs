//! Binary file formats.
//!
//! * SWIM raw grid: `"SWIM"`, u32 LE version (= 1), u32 LE rows, u32 LE cols,
//!   then `rows * cols` little-endian f64 in row-major order.
//! * SWV1 volume: `"SWV1"`, three u32 LE dims, then little-endian f64 payload
//!   with the first dim slowest.
//! * MNIST IDX: big-endian magic `0x00000803` (images) or `0x00000801` (labels),
//!   big-endian u32 dims, u8 payload.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::Image;

pub const SWIM_MAGIC: &[u8; 4] = b"SWIM";
pub const SWIM_VERSION: u32 = 1;
pub const SWV_MAGIC: &[u8; 4] = b"SWV1";
pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// A dense row-major matrix as stored in a SWIM file.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Grid {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch(data.len(), rows * cols));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn into_image(self) -> Result<Image> {
        if self.rows != self.cols {
            return Err(Error::Format(format!(
                "image grid must be square, got {}x{}",
                self.rows, self.cols
            )));
        }
        Image::new(self.rows, self.data)
    }
}

impl From<&Image> for Grid {
    fn from(img: &Image) -> Self {
        Grid {
            rows: img.size(),
            cols: img.size(),
            data: img.data().to_vec(),
        }
    }
}

pub fn encode_swim(grid: &Grid) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * grid.data.len());
    out.extend_from_slice(SWIM_MAGIC);
    out.extend_from_slice(&SWIM_VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.rows as u32).to_le_bytes());
    out.extend_from_slice(&(grid.cols as u32).to_le_bytes());
    for v in &grid.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_swim(bytes: &[u8]) -> Result<Grid> {
    if bytes.len() < 16 {
        return Err(Error::Format("SWIM header truncated".into()));
    }
    if &bytes[0..4] != SWIM_MAGIC {
        return Err(Error::BadMagic {
            found: u32::from_be_bytes(bytes[0..4].try_into().unwrap()),
            expected: u32::from_be_bytes(*SWIM_MAGIC),
        });
    }
    let version = le_u32(&bytes[4..8]);
    if version != SWIM_VERSION {
        return Err(Error::Format(format!("unsupported SWIM version {version}")));
    }
    let rows = le_u32(&bytes[8..12]) as usize;
    let cols = le_u32(&bytes[12..16]) as usize;
    let data = le_f64s(&bytes[16..], rows * cols)?;
    Grid::new(rows, cols, data)
}

pub fn write_swim(path: impl AsRef<Path>, grid: &Grid) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_swim(grid))?;
    Ok(())
}

pub fn read_swim(path: impl AsRef<Path>) -> Result<Grid> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_swim(&bytes)
}

pub fn read_swim_image(path: impl AsRef<Path>) -> Result<Image> {
    read_swim(path)?.into_image()
}

/// Cubic sample grid from a SWV1 file, `dims = [d0, d1, d2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeFile {
    pub dims: [usize; 3],
    pub data: Vec<f64>,
}

pub fn encode_swv(vol: &VolumeFile) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * vol.data.len());
    out.extend_from_slice(SWV_MAGIC);
    for d in vol.dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in &vol.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_swv(bytes: &[u8]) -> Result<VolumeFile> {
    if bytes.len() < 16 {
        return Err(Error::Format("SWV1 header truncated".into()));
    }
    if &bytes[0..4] != SWV_MAGIC {
        return Err(Error::BadMagic {
            found: u32::from_be_bytes(bytes[0..4].try_into().unwrap()),
            expected: u32::from_be_bytes(*SWV_MAGIC),
        });
    }
    let dims = [
        le_u32(&bytes[4..8]) as usize,
        le_u32(&bytes[8..12]) as usize,
        le_u32(&bytes[12..16]) as usize,
    ];
    let data = le_f64s(&bytes[16..], dims.iter().product())?;
    Ok(VolumeFile { dims, data })
}

pub fn read_swv(path: impl AsRef<Path>) -> Result<VolumeFile> {
    decode_swv(&fs::read(path)?)
}

pub fn write_swv(path: impl AsRef<Path>, vol: &VolumeFile) -> Result<()> {
    fs::write(path, encode_swv(vol))?;
    Ok(())
}

/// Raw images from an IDX3 file.
#[derive(Debug, Clone)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn image(&self, i: usize) -> &[u8] {
        let n = self.rows * self.cols;
        &self.pixels[i * n..(i + 1) * n]
    }
}

pub fn decode_idx_images(bytes: &[u8]) -> Result<IdxImages> {
    let dims = idx_header(bytes, IDX_IMAGES_MAGIC, 3)?;
    let (count, rows, cols) = (dims[0], dims[1], dims[2]);
    let payload = &bytes[16..];
    if payload.len() != count * rows * cols {
        return Err(Error::Format(format!(
            "IDX image payload has {} bytes, header implies {}",
            payload.len(),
            count * rows * cols
        )));
    }
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels: payload.to_vec(),
    })
}

pub fn decode_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let dims = idx_header(bytes, IDX_LABELS_MAGIC, 1)?;
    let payload = &bytes[8..];
    if payload.len() != dims[0] {
        return Err(Error::Format(format!(
            "IDX label payload has {} bytes, header implies {}",
            payload.len(),
            dims[0]
        )));
    }
    Ok(payload.to_vec())
}

pub fn read_idx_images(path: impl AsRef<Path>) -> Result<IdxImages> {
    decode_idx_images(&fs::read(path)?)
}

pub fn read_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    decode_idx_labels(&fs::read(path)?)
}

fn idx_header(bytes: &[u8], magic: u32, ndims: usize) -> Result<Vec<usize>> {
    if bytes.len() < 4 {
        return Err(Error::Format("IDX header truncated".into()));
    }
    let found = u32::from_be_bytes(bytes[0..4].try_into().unwrap());
    if found != magic {
        return Err(Error::BadMagic {
            found,
            expected: magic,
        });
    }
    if bytes.len() < 4 + 4 * ndims {
        return Err(Error::Format("IDX header truncated".into()));
    }
    Ok((0..ndims)
        .map(|i| u32::from_be_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize)
        .collect())
}

fn le_u32(b: &[u8]) -> u32 {
    u32::from_le_bytes(b.try_into().unwrap())
}

fn le_f64s(payload: &[u8], count: usize) -> Result<Vec<f64>> {
    if payload.len() != 8 * count {
        return Err(Error::Format(format!(
            "payload has {} bytes, header implies {}",
            payload.len(),
            8 * count
        )));
    }
    Ok(payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn swim_header_layout() {
        let g = Grid::new(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.5]).unwrap();
        let bytes = encode_swim(&g);
        assert_eq!(&bytes[0..4], b"SWIM");
        assert_eq!(&bytes[4..8], &[1, 0, 0, 0]);
        assert_eq!(&bytes[8..12], &[2, 0, 0, 0]);
        assert_eq!(&bytes[12..16], &[3, 0, 0, 0]);
        assert_eq!(bytes.len(), 16 + 48);
        assert_eq!(&bytes[56..64], &6.5f64.to_le_bytes());
    }

    #[test]
    fn swim_rejects_bad_input() {
        assert!(matches!(decode_swim(b"SWIM"), Err(Error::Format(_))));
        let mut bytes = encode_swim(&Grid::new(1, 1, vec![0.0]).unwrap());
        bytes[0] = b'X';
        assert!(matches!(decode_swim(&bytes), Err(Error::BadMagic { .. })));
        let mut bytes = encode_swim(&Grid::new(1, 1, vec![0.0]).unwrap());
        bytes.pop();
        assert!(matches!(decode_swim(&bytes), Err(Error::Format(_))));
        let mut bytes = encode_swim(&Grid::new(1, 1, vec![0.0]).unwrap());
        bytes[4] = 2;
        assert!(matches!(decode_swim(&bytes), Err(Error::Format(_))));
    }

    #[test]
    fn swim_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.swim");
        let img = Image::from_fn(5, |r, c| (r as f64).sin() + c as f64 * 1e-300);
        write_swim(&path, &Grid::from(&img)).unwrap();
        let back = read_swim_image(&path).unwrap();
        assert_eq!(back.data(), img.data());
    }

    #[test]
    fn swv_round_trip() {
        let v = VolumeFile {
            dims: [2, 2, 3],
            data: (0..12).map(|i| i as f64 * 0.5).collect(),
        };
        let bytes = encode_swv(&v);
        assert_eq!(&bytes[0..4], b"SWV1");
        assert_eq!(decode_swv(&bytes).unwrap(), v);
    }

    fn idx_images_bytes(count: u32, rows: u32, cols: u32, pixels: &[u8]) -> Vec<u8> {
        let mut b = IDX_IMAGES_MAGIC.to_be_bytes().to_vec();
        for d in [count, rows, cols] {
            b.extend_from_slice(&d.to_be_bytes());
        }
        b.extend_from_slice(pixels);
        b
    }

    #[test]
    fn idx_images_and_labels() {
        let bytes = idx_images_bytes(2, 2, 2, &[0, 1, 2, 3, 4, 5, 6, 255]);
        let imgs = decode_idx_images(&bytes).unwrap();
        assert_eq!((imgs.count, imgs.rows, imgs.cols), (2, 2, 2));
        assert_eq!(imgs.image(1), &[4, 5, 6, 255]);

        let mut lb = IDX_LABELS_MAGIC.to_be_bytes().to_vec();
        lb.extend_from_slice(&3u32.to_be_bytes());
        lb.extend_from_slice(&[7, 2, 1]);
        assert_eq!(decode_idx_labels(&lb).unwrap(), vec![7, 2, 1]);
        // label magic on an image reader
        assert!(matches!(
            decode_idx_images(&lb),
            Err(Error::BadMagic { found: 0x801, expected: 0x803 })
        ));
        let truncated = idx_images_bytes(2, 2, 2, &[0; 7]);
        assert!(decode_idx_images(&truncated).is_err());
    }

    proptest! {
        #[test]
        fn swim_codec_is_bitwise_identity(rows in 1usize..6, cols in 1usize..6, seed in any::<u64>()) {
            let data: Vec<f64> = (0..rows * cols)
                .map(|i| f64::from_bits(seed.wrapping_mul(i as u64 + 1) >> 2))
                .collect();
            let g = Grid::new(rows, cols, data).unwrap();
            let back = decode_swim(&encode_swim(&g)).unwrap();
            prop_assert_eq!(back.rows, rows);
            prop_assert!(back.data.iter().zip(&g.data).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
    }
}
