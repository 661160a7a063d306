//! Row-major dense matrices.
//!
//! Blocks of column vectors (the `X` in `A·X`) are stored the same way: a block of `w`
//! vectors of length `n` is an `n × w` matrix whose rows are contiguous.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{dims, Error, Result};

#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        if self.rows > 8 {
            writeln!(f, "  ...")?;
        }
        write!(f, "]")
    }
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                expected: alloc::format!("{} entries", rows * cols),
                found: alloc::format!("{} entries", data.len()),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a slice of equally long rows.
    ///
    /// Panics if the rows are ragged; intended for literals.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// A single column vector.
    pub fn column_vector(v: &[f64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for (j, &v) in self.row(i).iter().enumerate() {
                t.data[j * self.rows + i] = v;
            }
        }
        t
    }

    /// First `k` columns.
    pub fn leading_columns(&self, k: usize) -> Self {
        assert!(k <= self.cols);
        Self::from_fn(self.rows, k, |i, j| self.get(i, j))
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|v| *v *= alpha);
    }

    pub fn scaled(mut self, alpha: f64) -> Self {
        self.scale(alpha);
        self
    }

    /// `self ← self + alpha·other`.
    pub fn axpy(&mut self, alpha: f64, other: &Self) -> Result<()> {
        self.check_same_shape(other)?;
        self.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += alpha * b);
        Ok(())
    }

    /// `self · rhs`.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension {
                expected: alloc::format!("{} rows in right factor", self.cols),
                found: dims(rhs.rows, rhs.cols),
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        let w = rhs.cols;
        for i in 0..self.rows {
            let out_row = &mut out.data[i * w..(i + 1) * w];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a != 0.0 {
                    axpy_slice(out_row, a, rhs.row(k));
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · rhs` without forming the transpose.
    pub fn t_mul(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows {
            return Err(Error::Dimension {
                expected: alloc::format!("{} rows in right factor", self.rows),
                found: dims(rhs.rows, rhs.cols),
            });
        }
        let w = rhs.cols;
        let mut out = Self::zeros(self.cols, w);
        for i in 0..self.rows {
            let x = rhs.row(i);
            for (k, &a) in self.row(i).iter().enumerate() {
                if a != 0.0 {
                    axpy_slice(&mut out.data[k * w..(k + 1) * w], a, x);
                }
            }
        }
        Ok(out)
    }

    /// Squared Euclidean norm of every row.
    pub fn row_norms_sq(&self) -> Vec<f64> {
        (0..self.rows).map(|i| norm_sq(self.row(i))).collect()
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        norm_sq(&self.data)
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.frobenius_norm_sq())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Dimension {
                expected: dims(self.rows, self.cols),
                found: dims(other.rows, other.cols),
            });
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn axpy_slice(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[inline]
pub(crate) fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Squared distance between two equally long slices.
#[inline]
pub(crate) fn diff_norm_sq(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}
