//! Operators built on top of another operator.
//!
//! Each composition owns its own meter and forwards every product to the wrapped operator
//! through its metered entry points, so the wrapped meter sees exactly what the composition
//! costs in queries to the underlying matrix.

use crate::error::Result;
use crate::linalg::TriangularFactor;
use crate::matrix::DenseMatrix;
use crate::operator::{LinearOperator, QueryMeter};
use crate::pairs::PairSet;

/// `x ↦ Aᵀ(A·x)`. One column costs one forward and one transpose query on `A`.
pub struct GramOperator<'a> {
    inner: &'a dyn LinearOperator,
    meter: QueryMeter,
}

pub fn compose_gram(op: &dyn LinearOperator) -> GramOperator<'_> {
    GramOperator {
        inner: op,
        meter: QueryMeter::new(),
    }
}

impl LinearOperator for GramOperator<'_> {
    fn n_rows(&self) -> usize {
        self.inner.n_cols()
    }

    fn n_cols(&self) -> usize {
        self.inner.n_cols()
    }

    fn meter(&self) -> &QueryMeter {
        &self.meter
    }

    fn multiply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.inner.apply_transpose(&self.inner.apply(x)?)
    }

    fn multiply_transpose(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.multiply(x)
    }
}

/// `M = B·A` where `B` is the implicit incidence matrix of a [`PairSet`].
///
/// Forward products difference rows of `A·X`; transpose products scatter-add into the
/// `t` data rows before applying `Aᵀ`. `B` is never formed.
pub struct IncidenceOperator<'a> {
    inner: &'a dyn LinearOperator,
    pairs: &'a PairSet,
    meter: QueryMeter,
}

pub fn compose_incidence<'a>(op: &'a dyn LinearOperator, pairs: &'a PairSet) -> Result<IncidenceOperator<'a>> {
    pairs.check_bounds(op.n_rows())?;
    Ok(IncidenceOperator {
        inner: op,
        pairs,
        meter: QueryMeter::new(),
    })
}

impl IncidenceOperator<'_> {
    pub fn pairs(&self) -> &PairSet {
        self.pairs
    }
}

impl LinearOperator for IncidenceOperator<'_> {
    fn n_rows(&self) -> usize {
        self.pairs.len()
    }

    fn n_cols(&self) -> usize {
        self.inner.n_cols()
    }

    fn meter(&self) -> &QueryMeter {
        &self.meter
    }

    fn multiply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        Ok(self.pairs.difference(&self.inner.apply(x)?))
    }

    fn multiply_transpose(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        let scattered = self.pairs.scatter(x, self.inner.n_rows());
        self.inner.apply_transpose(&scattered)
    }
}

/// `x ↦ A·(R⁻¹x)` with transpose `x ↦ R⁻ᵀ(Aᵀx)`, via triangular solves.
pub struct RightSolveOperator<'a> {
    inner: &'a dyn LinearOperator,
    factor: &'a TriangularFactor,
    meter: QueryMeter,
}

pub fn compose_right_solve<'a>(
    op: &'a dyn LinearOperator,
    factor: &'a TriangularFactor,
) -> Result<RightSolveOperator<'a>> {
    factor.ensure_nonsingular()?;
    if factor.dim() != op.n_cols() {
        return Err(crate::Error::Dimension {
            expected: alloc::format!("{0}x{0} factor", op.n_cols()),
            found: alloc::format!("{0}x{0}", factor.dim()),
        });
    }
    Ok(RightSolveOperator {
        inner: op,
        factor,
        meter: QueryMeter::new(),
    })
}

impl LinearOperator for RightSolveOperator<'_> {
    fn n_rows(&self) -> usize {
        self.inner.n_rows()
    }

    fn n_cols(&self) -> usize {
        self.inner.n_cols()
    }

    fn meter(&self) -> &QueryMeter {
        &self.meter
    }

    fn multiply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.inner.apply(&self.factor.solve(x)?)
    }

    fn multiply_transpose(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.factor.solve_transpose(&self.inner.apply_transpose(x)?)
    }
}
