//! Reproducible Gaussian streams.
//!
//! A `(seed, stream)` pair selects one ChaCha8 keystream: the seed is expanded into the key
//! with `SeedableRng::seed_from_u64` and the stream id becomes the ChaCha stream word, so
//! streams under one seed never overlap. Uniforms take the top 53 bits of each `u64`;
//! normals come from the Box–Muller transform evaluated with `libm`, which is pure Rust and
//! gives the same bits on every platform.

use core::f64::consts::TAU;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::matrix::DenseMatrix;

/// Stream carrying the range-finding sketch `S`.
pub const STREAM_RANGE: u64 = 0;
/// Stream carrying the residual probe `G` (also used by the plain JL baseline).
pub const STREAM_PROBE: u64 = 1;
/// Stream carrying the subspace embedding used to build the orthogonalizer.
pub const STREAM_EMBEDDING: u64 = 2;
/// Stream used to draw random orthogonal matrices for synthetic spectra.
pub const STREAM_ROTATION: u64 = 3;

pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, spare: None }
    }

    /// Uniform on `(0, 1]`.
    fn uniform_open0(&mut self) -> f64 {
        let bits = self.rng.next_u64() >> 11;
        (bits + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal variate.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform_open0();
        let u2 = self.uniform_open0();
        let radius = libm::sqrt(-2.0 * libm::log(u1));
        let (s, c) = libm::sincos(TAU * u2);
        self.spare = Some(radius * s);
        radius * c
    }
}

/// A `rows × cols` matrix of i.i.d. `N(0, scale²)` entries, filled row by row.
pub fn gaussian_block(rows: usize, cols: usize, seed: u64, stream: u64, scale: f64) -> DenseMatrix {
    let mut g = GaussianStream::new(seed, stream);
    DenseMatrix::from_fn(rows, cols, |_, _| scale * g.next_normal())
}
