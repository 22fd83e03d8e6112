use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} exceeds the supported limit {limit}")]
    CapExceeded {
        what: &'static str,
        value: u128,
        limit: u128,
    },

    #[error("index entry {entry} is outside 1..={dim}")]
    IndexOutOfRange { entry: usize, dim: usize },

    #[error("index has length {found}, expected {expected}")]
    IndexLength { expected: usize, found: usize },

    #[error("conflicting values for symmetric slot {index:?}: {existing} vs {new}")]
    Inconsistent {
        index: Vec<usize>,
        existing: String,
        new: String,
    },

    #[error("non-finite component at {index:?}")]
    NonFinite { index: Vec<usize> },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{0}")]
    Parity(String),

    /// Odd rank together with odd dimension has no known general volume density.
    #[error(
        "odd rank m = {rank} with odd dimension n = {dim} is unsupported: \
         no general expression for the natural volume form is known in this regime"
    )]
    UnsupportedParity { rank: usize, dim: usize },

    #[error("matrix is singular")]
    Singular,

    #[error("Jacobian determinant {det} is not positive; the transformation must preserve orientation")]
    Orientation { det: f64 },

    #[error("{0} degenerate node(s) in field and degenerate nodes are not permitted")]
    DegenerateNodes(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
