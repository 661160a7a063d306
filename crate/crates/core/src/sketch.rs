//! Gaussian sketches, range orthonormalization, and Monte-Carlo checks of the
//! Johnson–Lindenstrauss facts the estimators lean on.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{orthonormal_columns, RANK_TOLERANCE};
use crate::matrix::{norm_sq, DenseMatrix};
use crate::rng::{GaussianStream, STREAM_PROBE, STREAM_RANGE};

pub use crate::rng::gaussian_block;

/// The two random matrices of one adaptive run.
///
/// `S` (range finding) has i.i.d. `N(0, 1)` entries. `G` (residual probe) has i.i.d. entries
/// with standard deviation `1/√m_g`, which makes `‖xᵀG‖²` an unbiased estimate of `‖x‖²`.
/// Scaling `S` would not change the basis it produces, so it stays unscaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SketchPair {
    pub m_s: usize,
    pub m_g: usize,
    pub seed: u64,
}

impl SketchPair {
    pub fn new(m_s: usize, m_g: usize, seed: u64) -> Result<Self> {
        if m_s == 0 || m_g == 0 {
            return Err(Error::Parameter(alloc::format!(
                "sketch widths must be positive (m_s = {m_s}, m_g = {m_g})"
            )));
        }
        Ok(Self { m_s, m_g, seed })
    }

    /// `S ∈ R^{d × m_s}`.
    pub fn range_sketch(&self, d: usize) -> DenseMatrix {
        gaussian_block(d, self.m_s, self.seed, STREAM_RANGE, 1.0)
    }

    /// `G ∈ R^{d × m_g}`, scaled by `1/√m_g`.
    pub fn probe(&self, d: usize) -> DenseMatrix {
        probe_block(d, self.m_g, self.seed)
    }
}

/// Scaled Gaussian probe drawn from the probe stream.
pub fn probe_block(d: usize, width: usize, seed: u64) -> DenseMatrix {
    gaussian_block(d, width, seed, STREAM_PROBE, 1.0 / libm::sqrt(width as f64))
}

/// Matrix with orthonormal columns spanning the numerical range of a sketched block.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    q: DenseMatrix,
}

impl OrthonormalBasis {
    /// Wraps a matrix the caller guarantees to have orthonormal columns.
    pub fn from_orthonormal(q: DenseMatrix) -> Self {
        Self { q }
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.q
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.q
    }

    /// Number of columns kept after rank truncation.
    pub fn rank_used(&self) -> usize {
        self.q.cols()
    }

    pub fn dim(&self) -> usize {
        self.q.rows()
    }

    /// `max |QᵀQ − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.q.t_mul(&self.q).expect("square gram");
        let mut worst = 0.0f64;
        for i in 0..g.rows() {
            for (j, &v) in g.row(i).iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }
}

/// Orthonormal basis for `range(M)`; columns contributing less than `1e-12·‖M‖_F` beyond
/// the span already found are dropped.
pub fn orthonormalize(m: &DenseMatrix) -> Result<OrthonormalBasis> {
    if !m.is_finite() {
        return Err(Error::Input("cannot orthonormalize non-finite entries".into()));
    }
    Ok(OrthonormalBasis {
        q: orthonormal_columns(m, RANK_TOLERANCE),
    })
}

/// Monte-Carlo estimate of `E(‖Gx‖² − 1)²` for a unit vector `x` and `G ∈ R^{r×d}` with
/// i.i.d. `N(0, 1/r)` entries. The exact value is `2/r`.
///
/// Uses `x = e₁`, for which `Gx` is the first column of `G`.
pub fn check_jl_moment(r: usize, trials: usize, seed: u64) -> Result<f64> {
    check_jl_moment_for(&[1.0], r, trials, seed)
}

/// As [`check_jl_moment`] for an arbitrary direction `x` (normalized internally).
pub fn check_jl_moment_for(x: &[f64], r: usize, trials: usize, seed: u64) -> Result<f64> {
    if r == 0 {
        return Err(Error::Parameter("sketch rows r must be at least 1".into()));
    }
    if trials < 10_000 {
        return Err(Error::Parameter(alloc::format!(
            "at least 10000 trials are required, got {trials}"
        )));
    }
    let norm = libm::sqrt(norm_sq(x));
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::Input("direction must be a non-zero finite vector".into()));
    }
    let unit: Vec<f64> = x.iter().map(|v| v / norm).collect();
    let scale = 1.0 / libm::sqrt(r as f64);
    let mut g = GaussianStream::new(seed, STREAM_PROBE);
    let mut acc = 0.0;
    for _ in 0..trials {
        let mut len_sq = 0.0;
        for _ in 0..r {
            let y: f64 = unit.iter().map(|u| u * scale * g.next_normal()).sum();
            len_sq += y * y;
        }
        let dev = len_sq - 1.0;
        acc += dev * dev;
    }
    Ok(acc / trials as f64)
}

/// `max_i |‖Gx_i‖² − ‖x_i‖²| / ‖x_i‖²` over the rows `x_i` of `vectors`.
///
/// Zero rows are skipped; if every row is zero the result is `0`.
pub fn jlt_distortion_profile(g: &DenseMatrix, vectors: &DenseMatrix) -> Result<f64> {
    let projected = vectors.mul(&g.transpose())?;
    let mut worst = 0.0f64;
    for i in 0..vectors.rows() {
        let len = norm_sq(vectors.row(i));
        if len == 0.0 {
            continue;
        }
        let sketched = norm_sq(projected.row(i));
        worst = worst.max((sketched - len).abs() / len);
    }
    Ok(worst)
}

/// The distortion level `√(8·ln(2n/δ)/r)` that a scaled Gaussian with `r > 32·ln(2n/δ)`
/// rows keeps `n` fixed vectors within, with probability at least `1 − δ`.
pub fn jlt_distortion_bound(n: usize, delta: f64, r: usize) -> f64 {
    libm::sqrt(8.0 * libm::log(2.0 * n as f64 / delta) / r as f64)
}

/// Smallest `r` with `r > 32·ln(2n/δ)`.
pub fn jlt_min_rows(n: usize, delta: f64) -> usize {
    libm::floor(32.0 * libm::log(2.0 * n as f64 / delta)) as usize + 1
}
