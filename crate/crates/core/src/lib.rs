//! Matrix-free randomized estimators for squared row norms, pairwise distances and
//! leverage scores.
//!
//! The input matrix is only touched through block products `A·X` and `Aᵀ·X`
//! ([`LinearOperator`]), and every product is charged to a query meter. The adaptive
//! estimators spend part of their budget finding a dominant subspace, measure rows exactly
//! there, and use Gaussian probes only on what is left over. For matrices with decaying
//! spectra this needs far fewer queries than a plain Johnson–Lindenstrauss projection,
//! which is provided alongside as the baseline.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod compose;
pub mod distance;
pub mod error;
pub mod leverage;
pub mod linalg;
pub mod matrix;
pub mod operator;
pub mod pairs;
pub mod rng;
pub mod rownorm;
pub mod sketch;
pub mod sparse;
pub mod synth;

pub use compose::{compose_gram, compose_incidence, compose_right_solve};
pub use distance::{estimate_distances_adaptive, estimate_distances_jl, exact_distances, DistanceReport};
pub use error::{Error, Result};
pub use leverage::{build_orthogonalizer, estimate_leverage_adaptive, exact_leverage, LeverageReport};
pub use linalg::TriangularFactor;
pub use matrix::DenseMatrix;
pub use operator::{DenseOperator, LinearOperator, QueryCounts, QueryMeter};
pub use pairs::PairSet;
pub use rownorm::{
    estimate_rownorms_adaptive, estimate_rownorms_jl, exact_rownorms, residual_profile, EstimateReport, Method,
};
pub use sketch::{orthonormalize, OrthonormalBasis, SketchPair};
pub use sparse::{CsrMatrix, SparseOperator};
pub use synth::{make_powerlaw_matrix, SpectrumSpec};
