//! Compressed sparse row storage and its operator.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{axpy_slice, DenseMatrix};
use crate::operator::{LinearOperator, QueryMeter};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Assembles from `(row, col, value)` triplets. Repeated coordinates are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut counts = vec![0usize; rows + 1];
        for &(i, j, v) in triplets {
            if i >= rows {
                return Err(Error::Index { index: i, len: rows });
            }
            if j >= cols {
                return Err(Error::Index { index: j, len: cols });
            }
            if !v.is_finite() {
                return Err(Error::Input(alloc::format!("non-finite entry at ({i}, {j})")));
            }
            counts[i + 1] += 1;
        }
        for i in 0..rows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut entries = vec![(0usize, 0.0f64); triplets.len()];
        for &(i, j, v) in triplets {
            entries[next[i]] = (j, v);
            next[i] += 1;
        }

        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        indptr.push(0);
        for i in 0..rows {
            let row = &mut entries[counts[i]..counts[i + 1]];
            row.sort_by_key(|e| e.0);
            for &(j, v) in row.iter() {
                if indices.len() > indptr[i] && indices.last() == Some(&j) {
                    *values.last_mut().unwrap() += v;
                } else {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Ok(Self {
            rows,
            cols,
            indptr,
            indices,
            values,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[r.clone()], &self.values[r])
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            let (idx, vals) = self.row(i);
            for (&j, &v) in idx.iter().zip(vals) {
                m.set(i, j, v);
            }
        }
        m
    }

    /// Squared Euclidean norm of every row, straight from the stored entries.
    pub fn row_norms_sq(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).1.iter().map(|v| v * v).sum())
            .collect()
    }
}

#[derive(Debug)]
pub struct SparseOperator {
    matrix: CsrMatrix,
    meter: QueryMeter,
}

impl SparseOperator {
    pub fn new(matrix: CsrMatrix) -> Self {
        Self {
            matrix,
            meter: QueryMeter::new(),
        }
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }
}

impl LinearOperator for SparseOperator {
    fn n_rows(&self) -> usize {
        self.matrix.rows
    }

    fn n_cols(&self) -> usize {
        self.matrix.cols
    }

    fn meter(&self) -> &QueryMeter {
        &self.meter
    }

    fn multiply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        let mut out = DenseMatrix::zeros(self.matrix.rows, x.cols());
        for i in 0..self.matrix.rows {
            let (idx, vals) = self.matrix.row(i);
            let out_row = out.row_mut(i);
            for (&k, &a) in idx.iter().zip(vals) {
                axpy_slice(out_row, a, x.row(k));
            }
        }
        Ok(out)
    }

    fn multiply_transpose(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        let mut out = DenseMatrix::zeros(self.matrix.cols, x.cols());
        for i in 0..self.matrix.rows {
            let (idx, vals) = self.matrix.row(i);
            let xi = x.row(i);
            for (&k, &a) in idx.iter().zip(vals) {
                axpy_slice(out.row_mut(k), a, xi);
            }
        }
        Ok(out)
    }
}
