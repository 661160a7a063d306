//! Synthetic test matrices with power-law spectra, error metrics, and rate fitting.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{orthonormal_columns, RANK_TOLERANCE};
use crate::matrix::{dot, DenseMatrix};
use crate::rng::{gaussian_block, STREAM_ROTATION};

/// `A = QΛQᵀ` with `Λ_ii = i^{-c}` (1-based `i`) and `Q` a seeded random rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumSpec {
    pub d: usize,
    pub c: f64,
    pub seed: u64,
}

impl SpectrumSpec {
    pub fn new(d: usize, c: f64, seed: u64) -> Self {
        Self { d, c, seed }
    }

    /// The prescribed singular values, largest first.
    pub fn singular_values(&self) -> Vec<f64> {
        (1..=self.d).map(|i| libm::pow(i as f64, -self.c)).collect()
    }
}

/// Random orthogonal `d × d` matrix: Gram–Schmidt on a seeded Gaussian matrix, which keeps
/// the triangular factor's diagonal positive and so samples rotations uniformly.
pub fn random_orthogonal(d: usize, seed: u64) -> Result<DenseMatrix> {
    let q = orthonormal_columns(&gaussian_block(d, d, seed, STREAM_ROTATION, 1.0), RANK_TOLERANCE);
    if q.cols() != d {
        return Err(Error::Input(alloc::format!(
            "Gaussian draw lost rank ({} of {d} columns)",
            q.cols()
        )));
    }
    Ok(q)
}

/// Builds the symmetric test matrix of `spec`. The upper triangle is computed and mirrored,
/// so the result is exactly symmetric.
pub fn make_powerlaw_matrix(spec: &SpectrumSpec) -> Result<DenseMatrix> {
    if spec.d < 2 {
        return Err(Error::Parameter(alloc::format!(
            "dimension must be at least 2, got {}",
            spec.d
        )));
    }
    if !(spec.c >= 0.0 && spec.c.is_finite()) {
        return Err(Error::Parameter(alloc::format!(
            "decay exponent must be finite and >= 0, got {}",
            spec.c
        )));
    }
    let d = spec.d;
    let q = random_orthogonal(d, spec.seed)?;
    let lambda = spec.singular_values();
    let mut weighted = q.clone();
    for i in 0..d {
        for (v, l) in weighted.row_mut(i).iter_mut().zip(&lambda) {
            *v *= l;
        }
    }
    let mut a = DenseMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = dot(weighted.row(i), q.row(j));
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    Ok(a)
}

/// `max_i |x̃_i − x_i| / x_i` over rows with `x_i > 0`.
pub fn max_elementwise_rel_error(estimates: &[f64], exact: &[f64]) -> f64 {
    estimates
        .iter()
        .zip(exact)
        .filter(|(_, &x)| x > 0.0)
        .map(|(e, x)| (e - x).abs() / x)
        .fold(0.0, f64::max)
}

/// `|X̃ − X| / X` for the totals; `0` when both vanish.
pub fn frobenius_rel_error(estimates: &[f64], exact: &[f64]) -> f64 {
    let est: f64 = estimates.iter().sum();
    let ex: f64 = exact.iter().sum();
    if ex == 0.0 {
        return if est == 0.0 { 0.0 } else { f64::INFINITY };
    }
    (est - ex).abs() / ex
}

/// Least-squares slope of `ln(mean error)` against `ln(budget)`, where the mean is taken over
/// all points sharing a budget. Needs at least three distinct budgets and positive errors.
pub fn fit_loglog_slope(points: &[(usize, f64)]) -> Result<f64> {
    let mut by_budget: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for &(budget, err) in points {
        if budget == 0 || !err.is_finite() || err <= 0.0 {
            return Err(Error::Parameter(alloc::format!(
                "slope fit needs positive budgets and errors, got ({budget}, {err})"
            )));
        }
        let e = by_budget.entry(budget).or_insert((0.0, 0));
        e.0 += err;
        e.1 += 1;
    }
    if by_budget.len() < 3 {
        return Err(Error::Parameter(alloc::format!(
            "slope fit needs at least 3 budgets, got {}",
            by_budget.len()
        )));
    }
    let xy: Vec<(f64, f64)> = by_budget
        .iter()
        .map(|(&b, &(sum, n))| (libm::log(b as f64), libm::log(sum / n as f64)))
        .collect();
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = xy.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xy.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}
