//! Binary file formats for matrices, vectors and Fourier sampling masks.
//!
//! Matrices use the `RGDM` layout: the 4-byte magic `RGDM`, `u32` row count,
//! `u32` column count (both little-endian), then `rows * cols` little-endian
//! `f64` values in row-major order. Vectors are stored as single-column
//! matrices.
//!
//! Sampling masks use the `RGDK` layout: magic `RGDK`, `u32` grid height,
//! `u32` grid width, `u32` index count, then the sampled flat frequency
//! indices as little-endian `u32`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

const MATRIX_MAGIC: &[u8; 4] = b"RGDM";
const MASK_MAGIC: &[u8; 4] = b"RGDK";

pub fn write_matrix_to<W: Write>(mut w: W, matrix: &Array2<f64>) -> Result<()> {
    let (rows, cols) = matrix.dim();
    if rows > u32::MAX as usize || cols > u32::MAX as usize {
        return Err(Error::InvalidParameter("matrix too large for format".into()));
    }
    w.write_all(MATRIX_MAGIC)?;
    w.write_all(&(rows as u32).to_le_bytes())?;
    w.write_all(&(cols as u32).to_le_bytes())?;
    for &v in matrix.iter() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_matrix_from<R: Read>(mut r: R) -> Result<Array2<f64>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MATRIX_MAGIC {
        return Err(Error::Format("bad matrix magic, expected RGDM".into()));
    }
    let rows = read_u32(&mut r)? as usize;
    let cols = read_u32(&mut r)? as usize;
    let mut data = vec![0.0f64; rows.checked_mul(cols).ok_or_else(too_large)?];
    let mut buf = [0u8; 8];
    for v in data.iter_mut() {
        r.read_exact(&mut buf)?;
        *v = f64::from_le_bytes(buf);
    }
    Array2::from_shape_vec((rows, cols), data)
        .map_err(|e| Error::Format(format!("matrix shape error: {e}")))
}

pub fn write_matrix(path: &Path, matrix: &Array2<f64>) -> Result<()> {
    write_matrix_to(BufWriter::new(File::create(path)?), matrix)
}

pub fn read_matrix(path: &Path) -> Result<Array2<f64>> {
    read_matrix_from(BufReader::new(File::open(path)?))
}

/// Stores a vector as a single-column RGDM matrix.
pub fn write_vector(path: &Path, v: &Array1<f64>) -> Result<()> {
    let as_matrix = v
        .view()
        .into_shape_with_order((v.len(), 1))
        .map_err(|e| Error::Format(e.to_string()))?;
    write_matrix_to(BufWriter::new(File::create(path)?), &as_matrix.to_owned())
}

pub fn read_vector(path: &Path) -> Result<Array1<f64>> {
    let m = read_matrix(path)?;
    let (rows, cols) = m.dim();
    if cols != 1 && rows != 1 {
        return Err(Error::Format(format!(
            "expected a vector blob, got {rows}x{cols}"
        )));
    }
    Ok(Array1::from_iter(m.iter().copied()))
}

pub fn write_mask_to<W: Write>(mut w: W, h: usize, width: usize, indices: &[u32]) -> Result<()> {
    w.write_all(MASK_MAGIC)?;
    w.write_all(&(h as u32).to_le_bytes())?;
    w.write_all(&(width as u32).to_le_bytes())?;
    w.write_all(&(indices.len() as u32).to_le_bytes())?;
    for &i in indices {
        w.write_all(&i.to_le_bytes())?;
    }
    Ok(())
}

/// Returns `(h, w, indices)`.
pub fn read_mask_from<R: Read>(mut r: R) -> Result<(usize, usize, Vec<u32>)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MASK_MAGIC {
        return Err(Error::Format("bad mask magic, expected RGDK".into()));
    }
    let h = read_u32(&mut r)? as usize;
    let w = read_u32(&mut r)? as usize;
    let count = read_u32(&mut r)? as usize;
    let mut indices = Vec::with_capacity(count);
    for _ in 0..count {
        indices.push(read_u32(&mut r)?);
    }
    Ok((h, w, indices))
}

pub fn write_mask(path: &Path, h: usize, w: usize, indices: &[u32]) -> Result<()> {
    write_mask_to(BufWriter::new(File::create(path)?), h, w, indices)
}

pub fn read_mask(path: &Path) -> Result<(usize, usize, Vec<u32>)> {
    read_mask_from(BufReader::new(File::open(path)?))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn too_large() -> Error {
    Error::Format("matrix dimensions overflow".into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn matrix_roundtrip() {
        let m = array![[1.0, 2.0, 3.0], [4.0, 5.0, -6.5]];
        let mut buf = Vec::new();
        write_matrix_to(&mut buf, &m).unwrap();
        assert_eq!(&buf[0..4], b"RGDM");
        let back = read_matrix_from(buf.as_slice()).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn mask_roundtrip() {
        let idx = vec![0u32, 3, 7, 11];
        let mut buf = Vec::new();
        write_mask_to(&mut buf, 4, 4, &idx).unwrap();
        assert_eq!(&buf[0..4], b"RGDK");
        let (h, w, back) = read_mask_from(buf.as_slice()).unwrap();
        assert_eq!((h, w), (4, 4));
        assert_eq!(back, idx);
    }

    #[test]
    fn rejects_wrong_magic() {
        let buf = b"XXXX\x01\x00\x00\x00\x01\x00\x00\x00".to_vec();
        assert!(read_matrix_from(buf.as_slice()).is_err());
    }
}
