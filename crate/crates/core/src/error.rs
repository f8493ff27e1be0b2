//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("probability vector sums to {sum}, expected 1 within 1e-9")]
    NotNormalized { sum: f64 },

    #[error("negative probability entry {value} at index {index}")]
    NegativeEntry { index: usize, value: f64 },

    #[error("non-finite entry at index {index}")]
    NonFiniteEntry { index: usize },

    #[error("column {column} of the channel matrix sums to {sum}, expected 1 within 1e-9")]
    ColumnNotStochastic { column: usize, sum: f64 },

    #[error("parameter {name} = {value} outside [{min}, {max}]")]
    ParameterRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("{what} is limited to dimension {limit}, got {requested}")]
    ComplexityGuard {
        what: &'static str,
        limit: usize,
        requested: usize,
    },

    #[error("channel is not input symmetric")]
    NotInputSymmetric,

    #[error(
        "channel has no transitive input symmetry subgroup of order equal to its input dimension"
    )]
    NoRegularInputSymmetry,

    #[error("channel does not map the uniform input to the uniform output")]
    NotUniformPreserving,

    #[error("channel is not a binary-input symmetric matrix [z, reverse(z)]")]
    NotBms,

    #[error(
        "constraint C = {c} exceeds the symmetric privacy funnel threshold C* = {c_star}; \
         the symmetric construction is only optimal up to C*, use the brute-force oracle beyond it"
    )]
    BeyondThreshold { c: f64, c_star: f64 },

    #[error("invalid permutation mapping: {0:?} is not a bijection")]
    InvalidPermutation(Vec<usize>),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
