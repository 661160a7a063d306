//! Squared pairwise distances between rows of a data operator.
//!
//! Distances are row norms of `M = BA`, where `B` is the implicit incidence matrix of a
//! [`PairSet`]. The adaptive path sketches `MᵀM` as `Aᵀ(Bᵀ(B(AS)))` and then differences the
//! rows of the `t × m` products `AQ` and `AG − AQ(QᵀG)` pair by pair, so no `|pairs| × d`
//! matrix is ever formed.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{diff_norm_sq, DenseMatrix};
use crate::operator::{LinearOperator, QueryCounts};
use crate::pairs::PairSet;
use crate::rownorm::{project_and_probe, sketch_for, Method};
use crate::sketch::{orthonormalize, probe_block};

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceReport {
    pub method: Method,
    /// Squared-distance estimate per pair, in pair order.
    pub estimates: Vec<f64>,
    pub total: f64,
    /// Queries spent on the data operator.
    pub queries: QueryCounts,
    pub m_s: usize,
    pub m_g: usize,
    pub rank_used: usize,
    pub seed: u64,
}

fn check_pairs(data: &dyn LinearOperator, pairs: &PairSet) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::Parameter("pair set is empty".into()));
    }
    pairs.check_bounds(data.n_rows())
}

fn pair_norms(pairs: &PairSet, blocks: &[&DenseMatrix]) -> Vec<f64> {
    pairs
        .iter()
        .map(|(i, j)| blocks.iter().map(|b| diff_norm_sq(b.row(i), b.row(j))).sum())
        .collect()
}

/// Adaptive distance estimation for the rows of a `t × d` data operator.
pub fn estimate_distances_adaptive(
    data: &dyn LinearOperator,
    pairs: &PairSet,
    m_s: usize,
    m_g: usize,
    seed: u64,
) -> Result<DistanceReport> {
    check_pairs(data, pairs)?;
    let d = data.n_cols();
    let sketch = sketch_for(d, m_s, m_g, seed)?;

    let s = sketch.range_sketch(d);
    let y = data.apply(&s)?;
    let by = pairs.difference(&y);
    let bty = pairs.scatter(&by, data.n_rows());
    let sketched = data.apply_transpose(&bty)?;
    let basis = orthonormalize(&sketched)?;

    let projection = project_and_probe(data, &basis, &sketch.probe(d))?;
    let estimates = pair_norms(pairs, &[&projection.captured, &projection.residual]);
    let total = estimates.iter().sum();
    Ok(DistanceReport {
        method: Method::Adaptive,
        estimates,
        total,
        queries: QueryCounts {
            forward: m_s,
            transpose: m_s,
        } + projection.queries,
        m_s,
        m_g,
        rank_used: basis.rank_used(),
        seed,
    })
}

/// Baseline: `‖(e_i − e_j)ᵀ(AG)‖²` with a scaled Gaussian `G` of `width` columns.
pub fn estimate_distances_jl(
    data: &dyn LinearOperator,
    pairs: &PairSet,
    width: usize,
    seed: u64,
) -> Result<DistanceReport> {
    check_pairs(data, pairs)?;
    if width == 0 {
        return Err(Error::Parameter("projection width must be at least 1".into()));
    }
    let sketched = data.apply(&probe_block(data.n_cols(), width, seed))?;
    let estimates = pair_norms(pairs, &[&sketched]);
    let total = estimates.iter().sum();
    Ok(DistanceReport {
        method: Method::Jl,
        estimates,
        total,
        queries: QueryCounts {
            forward: width,
            transpose: 0,
        },
        m_s: 0,
        m_g: width,
        rank_used: 0,
        seed,
    })
}

/// Exact squared distances between rows of a materialized data matrix.
pub fn exact_distances(a: &DenseMatrix, pairs: &PairSet) -> Result<Vec<f64>> {
    pairs.check_bounds(a.rows())?;
    Ok(pair_norms(pairs, &[a]))
}
