use std::fs;
use std::path::Path;

use ndarray::Array2;

use super::dataset::{LabeledDataset, Labels, Provenance};
use crate::{Error, Result, SampleMatrix};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;
pub const N_DIGIT_CLASSES: usize = 10;

/// Conventional MNIST training-set file names.
pub const TRAIN_IMAGES_FILE: &str = "train-images-idx3-ubyte";
pub const TRAIN_LABELS_FILE: &str = "train-labels-idx1-ubyte";

fn be_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes(b.try_into().expect("four bytes")))
        .ok_or(Error::Idx {
            offset: offset as u64,
            reason: format!("header truncated (file has {} bytes)", bytes.len()),
        })
}

fn check_magic(bytes: &[u8], expected: u32) -> Result<()> {
    let magic = be_u32(bytes, 0)?;
    if magic != expected {
        return Err(Error::Idx {
            offset: 0,
            reason: format!("bad magic 0x{magic:08x}, expected 0x{expected:08x}"),
        });
    }
    Ok(())
}

fn check_payload(bytes: &[u8], header: usize, needed: usize) -> Result<()> {
    if bytes.len() < header + needed {
        return Err(Error::Idx {
            offset: bytes.len() as u64,
            reason: format!("payload truncated: expected {} bytes after the header, found {}", needed, bytes.len() - header),
        });
    }
    Ok(())
}

/// Parses an IDX image file into `(count, rows, cols, pixels)`.
pub fn parse_idx_images(bytes: &[u8]) -> Result<(usize, usize, usize, &[u8])> {
    check_magic(bytes, IMAGES_MAGIC)?;
    let count = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    let needed = count * rows * cols;
    check_payload(bytes, 16, needed)?;
    Ok((count, rows, cols, &bytes[16..16 + needed]))
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<&[u8]> {
    check_magic(bytes, LABELS_MAGIC)?;
    let count = be_u32(bytes, 4)? as usize;
    check_payload(bytes, 8, count)?;
    let labels = &bytes[8..8 + count];
    if let Some(i) = labels.iter().position(|&l| usize::from(l) >= N_DIGIT_CLASSES) {
        return Err(Error::Idx {
            offset: (8 + i) as u64,
            reason: format!("label {} outside 0..=9", labels[i]),
        });
    }
    Ok(labels)
}

/// Loads an IDX image/label pair; pixels are scaled by 1/255 into `[0, 1]`
/// and every image is flattened row-major.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<LabeledDataset> {
    let image_bytes = fs::read(images_path).map_err(|e| Error::io(images_path, e))?;
    let label_bytes = fs::read(labels_path).map_err(|e| Error::io(labels_path, e))?;
    let (count, rows, cols, pixels) = parse_idx_images(&image_bytes)?;
    let labels = parse_idx_labels(&label_bytes)?;
    if labels.len() != count {
        return Err(Error::Idx {
            offset: 4,
            reason: format!("label count {} does not match image count {count}", labels.len()),
        });
    }
    let width = rows * cols;
    let x = Array2::from_shape_vec((count, width), pixels.iter().map(|&p| f64::from(p) / 255.0).collect())
        .map_err(|e| Error::Shape(e.to_string()))?;
    let meta = Provenance::new("idx", None)
        .param("images", images_path.display().to_string())
        .param("labels", labels_path.display().to_string())
        .param("image_shape", [rows, cols]);
    LabeledDataset::new(
        SampleMatrix::with_prefix(x, "px")?,
        Labels::Classes {
            labels: labels.iter().map(|&l| usize::from(l)).collect(),
            n_classes: N_DIGIT_CLASSES,
        },
        meta,
    )
}

/// Serializes images (`count × rows·cols` bytes) in IDX format.
pub fn write_idx_images(path: &Path, rows: usize, cols: usize, pixels: &[u8]) -> Result<()> {
    let width = rows * cols;
    if width == 0 || !pixels.len().is_multiple_of(width) {
        return Err(Error::Shape(format!("{} pixel bytes do not split into {rows}x{cols} images", pixels.len())));
    }
    let mut out = Vec::with_capacity(16 + pixels.len());
    for v in [IMAGES_MAGIC, (pixels.len() / width) as u32, rows as u32, cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(pixels);
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn write_idx_labels(path: &Path, labels: &[u8]) -> Result<()> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
