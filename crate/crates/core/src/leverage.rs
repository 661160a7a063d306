//! Leverage scores of tall-and-skinny matrices.
//!
//! `θ_i = ‖e_iᵀU‖²` for an orthonormal basis `U` of `range(A)`. A Gaussian subspace
//! embedding `Π₁` with `r₁` rows is applied to `A`, and the triangular factor `R` of
//! `Π₁A = QR` makes `AR⁻¹` nearly orthonormal. The adaptive row-norm estimator then runs
//! on the composed operator `x ↦ A(R⁻¹x)`.

use alloc::vec::Vec;

use crate::compose::compose_right_solve;
use crate::error::{Error, Result};
use crate::linalg::{householder_r, orthonormal_columns, TriangularFactor, RANK_TOLERANCE};
use crate::matrix::DenseMatrix;
use crate::operator::{LinearOperator, QueryCounts};
use crate::rng::{gaussian_block, STREAM_EMBEDDING};
use crate::rownorm::estimate_rownorms_adaptive;

/// Failure probability used to size the default embedding.
pub const DEFAULT_DELTA: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct LeverageReport {
    /// Estimated leverage score per row.
    pub scores: Vec<f64>,
    pub total: f64,
    /// Nominal distortion `√(d/r₁)` of the embedding.
    pub epsilon1: f64,
    /// Rows of the subspace embedding.
    pub r1: usize,
    pub m_s: usize,
    pub m_g: usize,
    pub rank_used: usize,
    pub seed: u64,
    /// Queries spent on `A`, including the `r₁` transpose products of the embedding.
    pub queries: QueryCounts,
}

/// `max(4d, d + 8⌈ln(1/δ)⌉)` with `δ = 0.01`.
pub fn default_embedding_rows(d: usize) -> usize {
    let log_term = libm::ceil(libm::log(1.0 / DEFAULT_DELTA)) as usize;
    (4 * d).max(d + 8 * log_term)
}

/// Nominal embedding distortion: singular values of a scaled `r₁ × d` Gaussian restricted
/// to a `d`-dimensional subspace concentrate in `1 ± √(d/r₁)`.
pub fn nominal_distortion(d: usize, r1: usize) -> f64 {
    libm::sqrt(d as f64 / r1 as f64)
}

/// `R` from a QR factorization of `Π₁A`, with `Π₁` an `r₁ × n` Gaussian whose entries have
/// standard deviation `1/√r₁`. `Π₁A` is formed as `(AᵀΠ₁ᵀ)ᵀ`, costing `r₁` transpose queries.
pub fn build_orthogonalizer(a: &dyn LinearOperator, r1: usize, seed: u64) -> Result<TriangularFactor> {
    let (n, d) = a.shape();
    if d == 0 || n < d {
        return Err(Error::Parameter(alloc::format!(
            "leverage scores need a tall matrix with n >= d >= 1, got {n}x{d}"
        )));
    }
    if r1 < d {
        return Err(Error::Parameter(alloc::format!(
            "embedding rows r1 = {r1} must be at least the {d} columns"
        )));
    }
    let embedding_t = gaussian_block(n, r1, seed, STREAM_EMBEDDING, 1.0 / libm::sqrt(r1 as f64));
    let sketched = a.apply_transpose(&embedding_t)?.transpose();
    let factor = TriangularFactor::new(householder_r(&sketched)?)?;
    factor.ensure_nonsingular()?;
    Ok(factor)
}

/// Adaptive leverage-score estimation. Requires `1 ≤ m_s < d`, `m_g ≥ 1` and `r₁ ≥ d`.
pub fn estimate_leverage_adaptive(
    a: &dyn LinearOperator,
    r1: usize,
    m_s: usize,
    m_g: usize,
    seed: u64,
) -> Result<LeverageReport> {
    let factor = build_orthogonalizer(a, r1, seed)?;
    let composed = compose_right_solve(a, &factor)?;
    let rep = estimate_rownorms_adaptive(&composed, m_s, m_g, seed)?;
    Ok(LeverageReport {
        scores: rep.estimates,
        total: rep.total,
        epsilon1: nominal_distortion(a.n_cols(), r1),
        r1,
        m_s,
        m_g,
        rank_used: rep.rank_used,
        seed,
        queries: rep.queries
            + QueryCounts {
                forward: 0,
                transpose: r1,
            },
    })
}

/// Exact leverage scores from an orthonormal basis of the numerical column space.
/// They sum to the numerical rank.
pub fn exact_leverage(a: &DenseMatrix) -> Vec<f64> {
    orthonormal_columns(a, RANK_TOLERANCE).row_norms_sq()
}
