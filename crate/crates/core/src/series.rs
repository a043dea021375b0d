//! Row-major `T×p` observation matrices.
//!
//! Rows index time, columns index components. Estimators iterate over rows
//! in tight loops, so the storage is a flat row-major buffer rather than a
//! column-major `nalgebra` matrix.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A `T×p` real series, one row per time period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesMatrix {
    data: Vec<f64>,
    nobs: usize,
    dim: usize,
}

impl SeriesMatrix {
    /// Build from a flat row-major buffer.
    pub fn from_row_major(nobs: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("series must have at least one column".into()));
        }
        if data.len() != nobs * dim {
            return Err(Error::InvalidInput(format!(
                "buffer of length {} does not match {nobs}x{dim}",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("series contains non-finite values".into()));
        }
        Ok(Self { data, nobs, dim })
    }

    /// A single-column series.
    pub fn from_column(values: &[f64]) -> Result<Self> {
        Self::from_row_major(values.len(), 1, values.to_vec())
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidInput("ragged rows".into()));
        }
        Self::from_row_major(rows.len(), dim, rows.concat())
    }

    pub fn from_dmatrix(m: &DMatrix<f64>) -> Result<Self> {
        let mut data = Vec::with_capacity(m.len());
        for t in 0..m.nrows() {
            data.extend(m.row(t).iter().copied());
        }
        Self::from_row_major(m.nrows(), m.ncols(), data)
    }

    pub fn zeros(nobs: usize, dim: usize) -> Self {
        Self { data: vec![0.0; nobs * dim], nobs, dim }
    }

    /// Number of time periods `T`.
    pub fn nobs(&self) -> usize {
        self.nobs
    }

    /// Number of components `p`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn get(&self, t: usize, j: usize) -> f64 {
        self.data[t * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.nobs).map(|t| self.get(t, j)).collect()
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.nobs, self.dim, &self.data)
    }

    /// Multiply every entry by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self { data: self.data.iter().map(|x| x * c).collect(), ..*self }
    }

    /// Column means.
    pub fn means(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for t in 0..self.nobs {
            for (acc, x) in m.iter_mut().zip(self.row(t)) {
                *acc += x;
            }
        }
        let n = self.nobs.max(1) as f64;
        m.iter_mut().for_each(|x| *x /= n);
        m
    }

    /// Subtract column means.
    pub fn demeaned(&self) -> Self {
        let m = self.means();
        let mut data = self.data.clone();
        for row in data.chunks_mut(self.dim) {
            for (x, mu) in row.iter_mut().zip(&m) {
                *x -= mu;
            }
        }
        Self { data, ..*self }
    }

    /// Rows `start..end` as a new series.
    pub fn slice_rows(&self, start: usize, end: usize) -> Self {
        Self {
            data: self.data[start * self.dim..end * self.dim].to_vec(),
            nobs: end - start,
            dim: self.dim,
        }
    }
}

/// Lag-`k` cross-product `Σ_{t=k}^{T-1} v_t v_{t-k}ᵀ` (unnormalized), `k ≥ 0`.
pub(crate) fn lag_cross_product(v: &SeriesMatrix, k: usize) -> DMatrix<f64> {
    let p = v.dim();
    let mut out = DMatrix::zeros(p, p);
    for t in k..v.nobs() {
        let a = v.row(t);
        let b = v.row(t - k);
        for i in 0..p {
            for j in 0..p {
                out[(i, j)] += a[i] * b[j];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(SeriesMatrix::from_column(&[1.0, f64::NAN]).is_err());
        assert!(SeriesMatrix::from_row_major(0, 0, vec![]).is_err());
        assert!(SeriesMatrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn dmatrix_round_trip_keeps_layout() {
        let v = SeriesMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let m = v.to_dmatrix();
        assert_eq!(m[(1, 0)], 3.0);
        assert_eq!(SeriesMatrix::from_dmatrix(&m).unwrap(), v);
        assert_eq!(v.column(1), vec![2.0, 4.0, 6.0]);
    }

    #[test]
    fn demeaned_columns_sum_to_zero() {
        let v = SeriesMatrix::from_rows(&[vec![1.0, 0.0], vec![2.0, 4.0], vec![6.0, 5.0]]).unwrap();
        let d = v.demeaned();
        for m in d.means() {
            assert!(m.abs() < 1e-15);
        }
    }
}
