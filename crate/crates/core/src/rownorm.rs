//! Squared Euclidean row norms of a matrix-free operator.
//!
//! The adaptive estimator runs in two passes. The first sketches `AᵀA` with a Gaussian block
//! `S` and keeps an orthonormal basis `Q` of `range(AᵀAS)`; the second measures the rows of
//! `AQ` exactly and probes only the remainder `A(I − QQᵀ)` with a scaled Gaussian `G`:
//!
//! ```text
//! x̃_i = ‖e_iᵀ A Q‖² + ‖e_iᵀ (AG − AQ(QᵀG))‖²
//! ```
//!
//! The captured part carries no error, so the estimate is only as noisy as the residual
//! rows are long. Four blocks of products are spent (`AS`, `Aᵀ(AS)`, `AQ`, `AG`); the plain
//! Johnson–Lindenstrauss baseline spends one (`AG`).

use alloc::vec::Vec;
use core::time::Duration;

use crate::error::{Error, Result};
use crate::matrix::{norm_sq, DenseMatrix};
use crate::operator::{LinearOperator, QueryCounts};
use crate::sketch::{orthonormalize, probe_block, OrthonormalBasis, SketchPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Adaptive,
    Jl,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Adaptive => "adaptive",
            Method::Jl => "jl",
        }
    }
}

impl core::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adaptive" => Ok(Method::Adaptive),
            "jl" => Ok(Method::Jl),
            other => Err(Error::Parameter(alloc::format!("unknown method {other:?}"))),
        }
    }
}

/// Output of a row-norm estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub method: Method,
    /// One non-negative squared-norm estimate per row.
    pub estimates: Vec<f64>,
    /// Sum of `estimates`, accumulated in row order.
    pub total: f64,
    /// Queries spent on the operator the estimator was given.
    pub queries: QueryCounts,
    /// Range-sketch width (0 for the JL baseline).
    pub m_s: usize,
    /// Probe width.
    pub m_g: usize,
    /// Columns of `Q` kept after rank truncation (0 for the JL baseline).
    pub rank_used: usize,
    pub seed: u64,
    /// Filled in by callers that time the run.
    pub wall_time: Option<Duration>,
}

impl EstimateReport {
    fn new(
        method: Method,
        estimates: Vec<f64>,
        queries: QueryCounts,
        m_s: usize,
        m_g: usize,
        rank_used: usize,
        seed: u64,
    ) -> Self {
        let total = estimates.iter().sum();
        Self {
            method,
            estimates,
            total,
            queries,
            m_s,
            m_g,
            rank_used,
            seed,
            wall_time: None,
        }
    }
}

/// Products `AQ` and `A(I − QQᵀ)G` of the second pass.
#[derive(Debug, Clone)]
pub struct Projection {
    /// `Ã = AQ`, exact on the captured subspace.
    pub captured: DenseMatrix,
    /// `Δ̃ = AG − Ã(QᵀG)`, a sketch of the residual rows.
    pub residual: DenseMatrix,
    pub queries: QueryCounts,
}

impl Projection {
    /// `‖e_iᵀÃ‖² + ‖e_iᵀΔ̃‖²` for every row.
    pub fn row_estimates(&self) -> Vec<f64> {
        (0..self.captured.rows())
            .map(|i| norm_sq(self.captured.row(i)) + norm_sq(self.residual.row(i)))
            .collect()
    }
}

/// First pass: `Q` spanning `range(Aᵀ(AS))`.
pub fn capture_range(op: &dyn LinearOperator, sketch: &SketchPair) -> Result<(OrthonormalBasis, QueryCounts)> {
    let s = sketch.range_sketch(op.n_cols());
    let b = op.apply_transpose(&op.apply(&s)?)?;
    let queries = QueryCounts {
        forward: s.cols(),
        transpose: s.cols(),
    };
    Ok((orthonormalize(&b)?, queries))
}

/// Second pass for a fixed basis and probe block.
pub fn project_and_probe(op: &dyn LinearOperator, basis: &OrthonormalBasis, probe: &DenseMatrix) -> Result<Projection> {
    let q = basis.matrix();
    let captured = op.apply(q)?;
    let mut residual = op.apply(probe)?;
    let coupling = q.t_mul(probe)?;
    residual.axpy(-1.0, &captured.mul(&coupling)?)?;
    Ok(Projection {
        captured,
        residual,
        queries: QueryCounts {
            forward: q.cols() + probe.cols(),
            transpose: 0,
        },
    })
}

pub(crate) fn sketch_for(n_cols: usize, m_s: usize, m_g: usize, seed: u64) -> Result<SketchPair> {
    if m_s >= n_cols {
        return Err(Error::Parameter(alloc::format!(
            "range sketch width {m_s} must be smaller than the {n_cols} columns"
        )));
    }
    SketchPair::new(m_s, m_g, seed)
}

/// Adaptive row-norm estimation with range width `m_s` and probe width `m_g`.
///
/// Requires `1 ≤ m_s < n_cols` and `m_g ≥ 1`. Spends `m_s + rank_used + m_g` forward and
/// `m_s` transpose queries; without rank truncation that is `3·m_s + m_g` in total.
pub fn estimate_rownorms_adaptive(
    op: &dyn LinearOperator,
    m_s: usize,
    m_g: usize,
    seed: u64,
) -> Result<EstimateReport> {
    let sketch = sketch_for(op.n_cols(), m_s, m_g, seed)?;
    let (basis, first) = capture_range(op, &sketch)?;
    let projection = project_and_probe(op, &basis, &sketch.probe(op.n_cols()))?;
    Ok(EstimateReport::new(
        Method::Adaptive,
        projection.row_estimates(),
        first + projection.queries,
        m_s,
        m_g,
        basis.rank_used(),
        seed,
    ))
}

/// Plain Gaussian projection: `x̃_i = ‖e_iᵀAG‖²` with `G` of `width` scaled columns.
pub fn estimate_rownorms_jl(op: &dyn LinearOperator, width: usize, seed: u64) -> Result<EstimateReport> {
    if width == 0 {
        return Err(Error::Parameter("projection width must be at least 1".into()));
    }
    let g = probe_block(op.n_cols(), width, seed);
    let sketched = op.apply(&g)?;
    Ok(EstimateReport::new(
        Method::Jl,
        sketched.row_norms_sq(),
        QueryCounts {
            forward: width,
            transpose: 0,
        },
        0,
        width,
        0,
        seed,
    ))
}

/// `Σ_j A_ij²` for every row.
pub fn exact_rownorms(a: &DenseMatrix) -> Vec<f64> {
    a.row_norms_sq()
}

/// `‖e_iᵀA(I − QQᵀ)‖²` for every row of a materialized `A`.
pub fn residual_profile(a: &DenseMatrix, basis: &OrthonormalBasis) -> Result<Vec<f64>> {
    let q = basis.matrix();
    let mut r = a.clone();
    r.axpy(-1.0, &a.mul(q)?.mul(&q.transpose())?)?;
    Ok(r.row_norms_sq())
}
