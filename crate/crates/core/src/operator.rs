//! Matrix-free operators with query accounting.
//!
//! An operator is only reachable through block products `A·X` and `Aᵀ·X`. Every product
//! charges one query per column of the block to the operator's [`QueryMeter`], forward and
//! transpose tallied separately. Operators are immutable apart from the meter, which uses
//! atomics so a shared operator can be queried from several threads.

use alloc::borrow::Cow;
use core::ops::{Add, Sub};
use core::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{dims, Error, Result};
use crate::matrix::DenseMatrix;

/// Number of matrix-vector products spent, split by direction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct QueryCounts {
    pub forward: usize,
    pub transpose: usize,
}

impl QueryCounts {
    pub fn total(&self) -> usize {
        self.forward + self.transpose
    }
}

impl Add for QueryCounts {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            forward: self.forward + rhs.forward,
            transpose: self.transpose + rhs.transpose,
        }
    }
}

impl Sub for QueryCounts {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self {
            forward: self.forward - rhs.forward,
            transpose: self.transpose - rhs.transpose,
        }
    }
}

#[derive(Debug, Default)]
pub struct QueryMeter {
    forward: AtomicUsize,
    transpose: AtomicUsize,
}

impl QueryMeter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_forward(&self, columns: usize) {
        self.forward.fetch_add(columns, Ordering::Relaxed);
    }

    pub fn record_transpose(&self, columns: usize) {
        self.transpose.fetch_add(columns, Ordering::Relaxed);
    }

    pub fn counts(&self) -> QueryCounts {
        QueryCounts {
            forward: self.forward.load(Ordering::Relaxed),
            transpose: self.transpose.load(Ordering::Relaxed),
        }
    }

    pub fn reset(&self) {
        self.forward.store(0, Ordering::Relaxed);
        self.transpose.store(0, Ordering::Relaxed);
    }
}

/// A linear map `R^{n_cols} → R^{n_rows}` available only through block products.
///
/// Implementors provide the raw products; callers use [`apply`](Self::apply) and
/// [`apply_transpose`](Self::apply_transpose), which validate the block and charge the meter.
pub trait LinearOperator: Send + Sync {
    fn n_rows(&self) -> usize;
    fn n_cols(&self) -> usize;
    fn meter(&self) -> &QueryMeter;

    /// `A·X` for a block already known to have `n_cols` rows.
    fn multiply(&self, x: &DenseMatrix) -> Result<DenseMatrix>;

    /// `Aᵀ·X` for a block already known to have `n_rows` rows.
    fn multiply_transpose(&self, x: &DenseMatrix) -> Result<DenseMatrix>;

    fn shape(&self) -> (usize, usize) {
        (self.n_rows(), self.n_cols())
    }

    fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        check_block(x, self.n_cols())?;
        self.meter().record_forward(x.cols());
        self.multiply(x)
    }

    fn apply_transpose(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        check_block(x, self.n_rows())?;
        self.meter().record_transpose(x.cols());
        self.multiply_transpose(x)
    }

    fn queries(&self) -> QueryCounts {
        self.meter().counts()
    }
}

fn check_block(x: &DenseMatrix, rows: usize) -> Result<()> {
    if x.rows() != rows {
        return Err(Error::Dimension {
            expected: alloc::format!("block with {rows} rows"),
            found: dims(x.rows(), x.cols()),
        });
    }
    if !x.is_finite() {
        return Err(Error::Input("block contains non-finite entries".into()));
    }
    Ok(())
}

/// Operator backed by an in-memory dense matrix, owned or borrowed.
#[derive(Debug)]
pub struct DenseOperator<'a> {
    matrix: Cow<'a, DenseMatrix>,
    meter: QueryMeter,
}

impl DenseOperator<'static> {
    pub fn new(matrix: DenseMatrix) -> Self {
        Self {
            matrix: Cow::Owned(matrix),
            meter: QueryMeter::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(DenseMatrix::identity(n))
    }
}

impl<'a> DenseOperator<'a> {
    /// Wraps a borrowed matrix with a fresh meter.
    pub fn borrowed(matrix: &'a DenseMatrix) -> Self {
        Self {
            matrix: Cow::Borrowed(matrix),
            meter: QueryMeter::new(),
        }
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }
}

impl LinearOperator for DenseOperator<'_> {
    fn n_rows(&self) -> usize {
        self.matrix.rows()
    }

    fn n_cols(&self) -> usize {
        self.matrix.cols()
    }

    fn meter(&self) -> &QueryMeter {
        &self.meter
    }

    fn multiply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.matrix.mul(x)
    }

    fn multiply_transpose(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.matrix.t_mul(x)
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn n_rows(&self) -> usize {
        (**self).n_rows()
    }
    fn n_cols(&self) -> usize {
        (**self).n_cols()
    }
    fn meter(&self) -> &QueryMeter {
        (**self).meter()
    }
    fn multiply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        (**self).multiply(x)
    }
    fn multiply_transpose(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        (**self).multiply_transpose(x)
    }
}

/// Materializes an operator by applying it to the identity. Charges `n_cols` queries.
pub fn materialize(op: &dyn LinearOperator) -> Result<DenseMatrix> {
    op.apply(&DenseMatrix::identity(op.n_cols()))
}
