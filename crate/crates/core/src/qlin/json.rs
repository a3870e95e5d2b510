//! Matrix and vector interchange: complex numbers as `[re, im]` pairs,
//! matrices as row-major nested arrays.

use nalgebra::{DMatrix, DVector};

use super::matrix::{ComplexMatrix, ComplexVector};
use crate::{Error, Result, C64};

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &ComplexMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|r| {
            (0..m.ncols())
                .map(|c| [m[(r, c)].re, m[(r, c)].im])
                .collect()
        })
        .collect()
}

pub fn matrix_from_json(rows: &JsonMatrix) -> Result<ComplexMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(Error::DimensionMismatch("empty matrix".into()));
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch("ragged matrix rows".into()));
    }
    let entries: Vec<C64> = rows
        .iter()
        .flatten()
        .map(|&[re, im]| C64::new(re, im))
        .collect();
    if entries
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::NonFinite);
    }
    Ok(DMatrix::from_row_slice(nrows, ncols, &entries))
}

pub fn vector_to_json(v: &ComplexVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn vector_from_json(v: &[[f64; 2]]) -> Result<ComplexVector> {
    if v.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(DVector::from_iterator(
        v.len(),
        v.iter().map(|&[re, im]| C64::new(re, im)),
    ))
}
