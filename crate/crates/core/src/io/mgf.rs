//! `MGF1` float fields: magic `MGF1`, little-endian u32 height, width and
//! channel count, then row-major (pixel-major across channels)
//! little-endian f32 values.

use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{EmbeddingField, GridShape, ScalarField};

const MAGIC: &[u8; 4] = b"MGF1";

pub fn encode(shape: GridShape, channels: usize, values: impl IntoIterator<Item = f32>) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + shape.len() * channels * 4);
    out.extend_from_slice(MAGIC);
    for v in [shape.height, shape.width, channels] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> std::result::Result<(GridShape, usize, Vec<f32>), String> {
    if bytes.len() < 16 || &bytes[..4] != MAGIC {
        return Err("bad magic, expected MGF1".into());
    }
    let word = |k: usize| u32::from_le_bytes(bytes[4 + 4 * k..8 + 4 * k].try_into().unwrap()) as usize;
    let (h, w, ch) = (word(0), word(1), word(2));
    let shape = GridShape::new(h, w).map_err(|e| e.to_string())?;
    if ch == 0 {
        return Err("zero channels".into());
    }
    let need = shape.len() * ch * 4;
    let body = &bytes[16..];
    if body.len() != need {
        return Err(format!("expected {need} bytes of data, found {}", body.len()));
    }
    let values = body
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    Ok((shape, ch, values))
}

fn read(path: &Path) -> Result<(GridShape, usize, Vec<f32>)> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode(&bytes).map_err(|reason| Error::Format {
        path: path.to_path_buf(),
        reason,
    })
}

fn write(path: &Path, bytes: Vec<u8>) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn encode_scalar(field: &ScalarField) -> Vec<u8> {
    encode(field.shape(), 1, field.to_f32())
}

pub fn read_scalar(path: &Path) -> Result<ScalarField> {
    let (shape, ch, values) = read(path)?;
    if ch != 1 {
        return Err(Error::Format {
            path: path.to_path_buf(),
            reason: format!("expected 1 channel, found {ch}"),
        });
    }
    ScalarField::from_vec(shape, values.into_iter().map(f64::from).collect())
}

pub fn write_scalar(path: &Path, field: &ScalarField) -> Result<()> {
    write(path, encode_scalar(field))
}

pub fn read_embedding(path: &Path) -> Result<EmbeddingField> {
    let (shape, ch, values) = read(path)?;
    EmbeddingField::from_vec(shape, ch, values.into_iter().map(f64::from).collect())
}

pub fn write_embedding(path: &Path, field: &EmbeddingField) -> Result<()> {
    let values = field.as_slice().iter().map(|&v| v as f32);
    write(path, encode(field.shape(), field.dim(), values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let shape = GridShape::new(2, 1).unwrap();
        let bytes = encode(shape, 1, [1.0f32, -0.5]);
        assert_eq!(&bytes[..4], b"MGF1");
        assert_eq!(&bytes[4..16], &[2, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0]);
        assert_eq!(&bytes[16..20], &1.0f32.to_le_bytes());
    }

    #[test]
    fn rejects_wrong_length() {
        let shape = GridShape::new(2, 2).unwrap();
        let mut bytes = encode(shape, 1, [0.0f32; 4]);
        bytes.pop();
        assert!(decode(&bytes).is_err());
        assert!(decode(b"MGF2............").is_err());
    }

    proptest! {
        #[test]
        fn roundtrip(h in 1usize..6, w in 1usize..6, ch in 1usize..4, vals in proptest::collection::vec(-1e6f32..1e6, 100)) {
            let shape = GridShape::new(h, w).unwrap();
            let n = h * w * ch;
            let values: Vec<f32> = vals.iter().cycle().take(n).copied().collect();
            let (s, c, v) = decode(&encode(shape, ch, values.clone())).unwrap();
            prop_assert_eq!((s, c), (shape, ch));
            prop_assert_eq!(v, values);
        }
    }
}
