//! Flat binary spectrogram container.
//!
//! Layout: the magic `SPG1`, then channel, frame and bin counts as
//! little-endian `u32`, then `(re, im)` pairs of little-endian `f32` in
//! `(channel, frame, bin)` order.

use std::path::Path;

use ndarray::Array3;
use num_complex::Complex64;

use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"SPG1";
const HEADER_LEN: usize = 16;

pub fn write_dump_bytes(data: &Array3<Complex64>) -> Vec<u8> {
    let (c, t, f) = data.dim();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * data.len());
    out.extend_from_slice(MAGIC);
    for dim in [c, t, f] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    // iter() walks a standard-layout array in logical (c, t, f) order
    for z in data.iter() {
        out.extend_from_slice(&(z.re as f32).to_le_bytes());
        out.extend_from_slice(&(z.im as f32).to_le_bytes());
    }
    out
}

pub fn read_dump_bytes(bytes: &[u8]) -> Result<Array3<Complex64>> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(Error::format("missing SPG1 header"));
    }
    let dim = |i: usize| {
        let raw: [u8; 4] = bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap();
        u32::from_le_bytes(raw) as usize
    };
    let (c, t, f) = (dim(0), dim(1), dim(2));
    let expected = c
        .checked_mul(t)
        .and_then(|n| n.checked_mul(f))
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| Error::format("SPG1 dimensions overflow"))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != expected {
        return Err(Error::format(format!(
            "SPG1 body holds {} bytes, header {c}x{t}x{f} needs {expected}",
            body.len()
        )));
    }
    let values: Vec<Complex64> = body
        .chunks_exact(8)
        .map(|pair| {
            let re = f32::from_le_bytes(pair[..4].try_into().unwrap());
            let im = f32::from_le_bytes(pair[4..].try_into().unwrap());
            Complex64::new(re as f64, im as f64)
        })
        .collect();
    Array3::from_shape_vec((c, t, f), values).map_err(|e| Error::format(e.to_string()))
}

pub fn write_dump(path: impl AsRef<Path>, data: &Array3<Complex64>) -> Result<()> {
    std::fs::write(path, write_dump_bytes(data))?;
    Ok(())
}

pub fn read_dump(path: impl AsRef<Path>) -> Result<Array3<Complex64>> {
    read_dump_bytes(&std::fs::read(path)?)
}
