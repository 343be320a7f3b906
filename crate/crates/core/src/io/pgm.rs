//! Binary PGM (P5) grids.
//!
//! Writers always emit maxval 65535 with two-byte big-endian samples and no
//! comments. Readers accept comments in the header and any maxval in
//! `1..=65535` (one-byte samples below 256).

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{GridShape, InstanceGrid, LabelGrid};

pub fn encode(shape: GridShape, samples: &[u16]) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n65535\n", shape.width, shape.height).into_bytes();
    out.reserve(samples.len() * 2);
    for &s in samples {
        out.extend_from_slice(&s.to_be_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> std::result::Result<(GridShape, Vec<u16>), String> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err("bad magic, expected P5".into());
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        *field = header_number(bytes, &mut pos)?;
    }
    let [width, height, maxval] = fields;
    if maxval == 0 || maxval > 65535 {
        return Err(format!("maxval {maxval} out of range"));
    }
    // exactly one whitespace byte separates the header from the raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err("missing whitespace after maxval".into());
    }
    pos += 1;
    let shape = GridShape::new(height, width).map_err(|e| e.to_string())?;
    let wide = maxval > 255;
    let need = shape.len() * if wide { 2 } else { 1 };
    let raster = &bytes[pos..];
    if raster.len() < need {
        return Err(format!("truncated raster: {} of {need} bytes", raster.len()));
    }
    let samples = if wide {
        raster[..need]
            .chunks_exact(2)
            .map(|b| u16::from_be_bytes([b[0], b[1]]))
            .collect()
    } else {
        raster[..need].iter().map(|&b| b as u16).collect()
    };
    Ok((shape, samples))
}

fn header_number(bytes: &[u8], pos: &mut usize) -> std::result::Result<usize, String> {
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while *pos < bytes.len() && bytes[*pos] != b'\n' && bytes[*pos] != b'\r' {
                    *pos += 1;
                }
            }
            Some(_) => break,
            None => return Err("truncated header".into()),
        }
    }
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if start == *pos {
        return Err("expected a number in header".into());
    }
    std::str::from_utf8(&bytes[start..*pos])
        .unwrap()
        .parse()
        .map_err(|_| "header number too large".to_string())
}

fn read_raw(path: &Path) -> Result<(GridShape, Vec<u16>)> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode(&bytes).map_err(|reason| Error::Format {
        path: path.to_path_buf(),
        reason,
    })
}

fn write_raw(path: &Path, shape: GridShape, samples: &[u16]) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = std::fs::File::create(path).map_err(io)?;
    f.write_all(&encode(shape, samples)).map_err(io)
}

pub fn read_labels(path: &Path) -> Result<LabelGrid> {
    let (shape, samples) = read_raw(path)?;
    LabelGrid::from_vec(shape, samples)
}

pub fn write_labels(path: &Path, grid: &LabelGrid) -> Result<()> {
    write_raw(path, grid.shape(), grid.as_slice())
}

pub fn read_instances(path: &Path) -> Result<InstanceGrid> {
    let (shape, samples) = read_raw(path)?;
    InstanceGrid::from_vec(shape, samples).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

pub fn write_instances(path: &Path, grid: &InstanceGrid) -> Result<()> {
    write_raw(path, grid.shape(), grid.as_slice())
}
