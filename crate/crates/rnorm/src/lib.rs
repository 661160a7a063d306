//! File formats, the benchmark sweep and the command-line front end for `rnorm-core`.

pub mod bench;
pub mod cli;
pub mod error;
pub mod io;

pub use error::{Error, Result};
