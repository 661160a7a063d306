//! Dense factorizations: rank-revealing orthonormalization, Householder QR, and the
//! triangular factor used as an approximate orthogonalizer.

use alloc::vec::Vec;

use crate::error::{dims, Error, Result};
use crate::matrix::{axpy_slice, dot, norm_sq, DenseMatrix};

/// Diagonal entries below this fraction of the largest diagonal magnitude mark a triangular
/// factor as singular.
pub const SINGULARITY_TOLERANCE: f64 = 1e-12;

/// Columns whose orthogonalized remainder falls below this fraction of `‖M‖_F` are dropped.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Orthonormal basis for the numerical column space of `m`.
///
/// Classical Gram–Schmidt with reorthogonalization: each column is projected against the
/// basis kept so far at least twice, and a third time if the second pass still removed a
/// large share of it. A column whose remainder is below `rel_tol·‖M‖_F` lies in the span
/// already found and is dropped. Returns the `rows × rank` basis.
pub fn orthonormal_columns(m: &DenseMatrix, rel_tol: f64) -> DenseMatrix {
    let (n, w) = m.shape();
    let threshold = rel_tol * m.frobenius_norm();
    // Columns as contiguous rows.
    let cols = m.transpose();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(w.min(n));
    let mut coeffs = Vec::with_capacity(w);

    for j in 0..w {
        if basis.len() == n {
            break;
        }
        let mut v = cols.row(j).to_vec();
        let mut norm = libm::sqrt(norm_sq(&v));
        if norm <= threshold || norm == 0.0 {
            continue;
        }
        for pass in 0..3 {
            coeffs.clear();
            coeffs.extend(basis.iter().map(|q| dot(q, &v)));
            for (q, &h) in basis.iter().zip(&coeffs) {
                axpy_slice(&mut v, -h, q);
            }
            let new_norm = libm::sqrt(norm_sq(&v));
            let settled = new_norm > 0.7 * norm;
            norm = new_norm;
            if pass >= 1 && settled {
                break;
            }
        }
        if norm <= threshold || norm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }

    let mut q = DenseMatrix::zeros(n, basis.len());
    for (k, col) in basis.iter().enumerate() {
        for (i, &x) in col.iter().enumerate() {
            q.set(i, k, x);
        }
    }
    q
}

/// Upper-triangular factor `R` of a Householder QR of a tall matrix (`rows ≥ cols`),
/// normalized to a non-negative diagonal.
pub fn householder_r(m: &DenseMatrix) -> Result<DenseMatrix> {
    let (rows, cols) = m.shape();
    if rows < cols {
        return Err(Error::Dimension {
            expected: alloc::format!("at least {cols} rows"),
            found: dims(rows, cols),
        });
    }
    // Work column-major so reflections touch contiguous memory.
    let mut a = m.transpose();
    for k in 0..cols {
        let (head, tail) = a.as_mut_slice().split_at_mut((k + 1) * rows);
        let col = &mut head[k * rows..];
        let x = &mut col[k..];
        let alpha = libm::sqrt(norm_sq(x));
        if alpha == 0.0 {
            continue;
        }
        let beta = if x[0] > 0.0 { -alpha } else { alpha };
        // v = x − beta·e1, stored in place; R[k,k] = beta.
        x[0] -= beta;
        let vnorm_sq = norm_sq(x);
        if vnorm_sq > 0.0 {
            for other in tail.chunks_exact_mut(rows) {
                let y = &mut other[k..];
                let s = 2.0 * dot(x, y) / vnorm_sq;
                axpy_slice(y, -s, x);
            }
        }
        x[0] = beta;
    }
    let mut r = DenseMatrix::zeros(cols, cols);
    for j in 0..cols {
        for i in 0..=j {
            r.set(i, j, a.get(j, i));
        }
    }
    for i in 0..cols {
        if r.get(i, i) < 0.0 {
            r.row_mut(i).iter_mut().for_each(|v| *v = -*v);
        }
    }
    Ok(r)
}

/// A square upper-triangular matrix used through triangular solves only.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularFactor {
    r: DenseMatrix,
    singular: bool,
}

impl TriangularFactor {
    /// Wraps `r`, which must be square with an exactly zero strict lower triangle.
    pub fn new(r: DenseMatrix) -> Result<Self> {
        let (n, m) = r.shape();
        if n != m || n == 0 {
            return Err(Error::Dimension {
                expected: "non-empty square matrix".into(),
                found: dims(n, m),
            });
        }
        for i in 0..n {
            if r.row(i)[..i].iter().any(|&v| v != 0.0) {
                return Err(Error::Input(alloc::format!(
                    "entry below the diagonal in row {i} is non-zero"
                )));
            }
        }
        if !r.is_finite() {
            return Err(Error::Input("triangular factor has non-finite entries".into()));
        }
        let max_diag = (0..n).fold(0.0f64, |acc, i| acc.max(r.get(i, i).abs()));
        let singular = (0..n).any(|i| r.get(i, i).abs() <= SINGULARITY_TOLERANCE * max_diag);
        Ok(Self { r, singular })
    }

    pub fn dim(&self) -> usize {
        self.r.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.r
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// Errors with the offending diagonal entry when the factor is flagged singular.
    pub fn ensure_nonsingular(&self) -> Result<()> {
        if !self.singular {
            return Ok(());
        }
        let n = self.dim();
        let max_diag = (0..n).fold(0.0f64, |acc, i| acc.max(self.r.get(i, i).abs()));
        let index = (0..n)
            .find(|&i| self.r.get(i, i).abs() <= SINGULARITY_TOLERANCE * max_diag)
            .unwrap_or(0);
        Err(Error::SingularFactor {
            index,
            value: self.r.get(index, index),
        })
    }

    /// `R⁻¹·B` by back substitution.
    pub fn solve(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        self.ensure_nonsingular()?;
        self.check_rhs(b)?;
        let n = self.dim();
        let mut x = b.clone();
        for i in (0..n).rev() {
            let r_row = self.r.row(i);
            let (upper, lower) = x.as_mut_slice().split_at_mut((i + 1) * b.cols());
            let xi = &mut upper[i * b.cols()..];
            for (k, xk) in lower.chunks_exact(b.cols()).enumerate() {
                let rik = r_row[i + 1 + k];
                if rik != 0.0 {
                    axpy_slice(xi, -rik, xk);
                }
            }
            let d = r_row[i];
            xi.iter_mut().for_each(|v| *v /= d);
        }
        Ok(x)
    }

    /// `R⁻ᵀ·B` by forward substitution.
    pub fn solve_transpose(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        self.ensure_nonsingular()?;
        self.check_rhs(b)?;
        let n = self.dim();
        let w = b.cols();
        let mut x = b.clone();
        for i in 0..n {
            let (done, rest) = x.as_mut_slice().split_at_mut(i * w);
            let xi = &mut rest[..w];
            for (k, xk) in done.chunks_exact(w).enumerate() {
                let rki = self.r.get(k, i);
                if rki != 0.0 {
                    axpy_slice(xi, -rki, xk);
                }
            }
            let d = self.r.get(i, i);
            xi.iter_mut().for_each(|v| *v /= d);
        }
        Ok(x)
    }

    fn check_rhs(&self, b: &DenseMatrix) -> Result<()> {
        if b.rows() != self.dim() {
            return Err(Error::Dimension {
                expected: alloc::format!("block with {} rows", self.dim()),
                found: dims(b.rows(), b.cols()),
            });
        }
        Ok(())
    }
}
