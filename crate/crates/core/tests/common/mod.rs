#![allow(dead_code)]

use nalgebra::DMatrix;
use rnorm_core::DenseMatrix;

pub fn to_na(a: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice())
}

pub fn from_na(a: &DMatrix<f64>) -> DenseMatrix {
    DenseMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Gaussian test matrix from a generator independent of the crate's own RNG.
pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| {
        // sum of 12 uniforms, shifted: close enough to N(0,1) for generic test matrices
        (0..12).map(|_| rng.random::<f64>()).sum::<f64>() - 6.0
    })
}

pub fn max_abs_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn rel_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    max_abs_diff(a, b) / b.max_abs().max(f64::MIN_POSITIVE)
}

/// Orthonormal basis of `range(a)` from nalgebra's Householder QR (full column rank assumed).
pub fn qr_basis(a: &DenseMatrix) -> DenseMatrix {
    from_na(&to_na(a).qr().q())
}

/// Singular values, largest first.
pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = to_na(a).singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    s
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}
