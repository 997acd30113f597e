//! Reader for IDX files (MNIST layout): a big-endian magic word
//! `0x0000 <type> <ndims>`, `ndims` big-endian u32 dimensions, then raw data.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::data::Dataset;

const UNSIGNED_BYTE: u8 = 0x08;

/// Decoded unsigned-byte IDX tensor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxArray {
    pub dims: Vec<usize>,
    pub data: Vec<u8>,
}

/// Parses an unsigned-byte IDX stream.
pub fn parse_idx(bytes: &[u8]) -> Result<IdxArray> {
    if bytes.len() < 4 || bytes[0] != 0 || bytes[1] != 0 {
        return Err(Error::Io("IDX: bad magic".into()));
    }
    if bytes[2] != UNSIGNED_BYTE {
        return Err(Error::Io(format!("IDX: unsupported element type 0x{:02x}", bytes[2])));
    }
    let ndims = bytes[3] as usize;
    let header = 4 + 4 * ndims;
    if bytes.len() < header {
        return Err(Error::Io("IDX: truncated header".into()));
    }
    let dims: Vec<usize> = bytes[4..header]
        .chunks_exact(4)
        .map(|c| u32::from_be_bytes([c[0], c[1], c[2], c[3]]) as usize)
        .collect();
    let count: usize = dims.iter().product();
    if bytes.len() - header != count {
        return Err(Error::Io(format!(
            "IDX: expected {count} data bytes, found {}",
            bytes.len() - header
        )));
    }
    Ok(IdxArray { dims, data: bytes[header..].to_vec() })
}

/// Encodes an unsigned-byte IDX stream.
pub fn encode_idx(dims: &[usize], data: &[u8]) -> Vec<u8> {
    let mut out = vec![0, 0, UNSIGNED_BYTE, dims.len() as u8];
    for &d in dims {
        out.extend_from_slice(&(d as u32).to_be_bytes());
    }
    out.extend_from_slice(data);
    out
}

fn read_file(path: &Path) -> Result<IdxArray> {
    let mut buf = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_idx(&buf)
}

/// Builds a dataset from an image file (n × rows × cols) and a label file (n).
/// Pixels are scaled to `[0, 1]`.
pub fn load_idx_dataset<T: Scalar>(images: &Path, labels: &Path, num_classes: usize) -> Result<Dataset<T>> {
    let img = read_file(images)?;
    let lab = read_file(labels)?;
    dataset_from_idx(&img, &lab, num_classes)
}

pub fn dataset_from_idx<T: Scalar>(img: &IdxArray, lab: &IdxArray, num_classes: usize) -> Result<Dataset<T>> {
    if img.dims.is_empty() || lab.dims.len() != 1 || img.dims[0] != lab.dims[0] {
        return Err(Error::Io("IDX: image and label counts disagree".into()));
    }
    let n = img.dims[0];
    let dim = if n == 0 { 0 } else { img.data.len() / n };
    let scale = T::lit(1.0 / 255.0);
    let features = img.data.iter().map(|&p| T::count(p as usize) * scale).collect();
    let labels = lab.data.iter().map(|&y| y as usize).collect();
    Dataset::new(dim, num_classes, features, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_mnist_style_header() {
        // 2 images of 2x3
        let bytes = encode_idx(&[2, 2, 3], &[0, 255, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10]);
        assert_eq!(&bytes[..8], &[0, 0, 8, 3, 0, 0, 0, 2]);
        let arr = parse_idx(&bytes).unwrap();
        assert_eq!(arr.dims, vec![2, 2, 3]);
        let labels = parse_idx(&encode_idx(&[2], &[7, 1])).unwrap();
        let d: Dataset<f64> = dataset_from_idx(&arr, &labels, 10).unwrap();
        assert_eq!(d.dim, 6);
        assert_eq!(d.labels(), &[7, 1]);
        assert_eq!(d.row(0)[1], 1.0);
    }

    #[test]
    fn rejects_corrupt_files() {
        assert!(parse_idx(&[1, 0, 8, 1]).is_err());
        assert!(parse_idx(&[0, 0, 0x0D, 1, 0, 0, 0, 0]).is_err());
        assert!(parse_idx(&encode_idx(&[3], &[1, 2])).is_err());
    }

    #[test]
    fn reads_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let img = dir.path().join("img.idx");
        let lab = dir.path().join("lab.idx");
        std::fs::write(&img, encode_idx(&[1, 1, 2], &[0, 51])).unwrap();
        std::fs::write(&lab, encode_idx(&[1], &[3])).unwrap();
        let d: Dataset<f32> = load_idx_dataset(&img, &lab, 10).unwrap();
        assert!((d.row(0)[1] - 0.2).abs() < 1e-6);
    }
}
