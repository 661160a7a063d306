use alloc::string::String;

/// Failures raised by operators and estimators.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Block or matrix shapes do not line up.
    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: String, found: String },

    /// Input data is unusable (non-finite entries and the like).
    #[error("invalid input: {0}")]
    Input(String),

    /// A width, budget or count is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A row or pair index exceeds the data it refers to.
    #[error("index {index} out of range for {len} rows")]
    Index { index: usize, len: usize },

    /// The triangular factor has a (numerically) vanishing diagonal.
    #[error(
        "triangular factor is numerically singular (|R[{index},{index}]| = {value:e}); \
         the input must have full column rank"
    )]
    SingularFactor { index: usize, value: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn dims(rows: usize, cols: usize) -> String {
    alloc::format!("{rows}x{cols}")
}
