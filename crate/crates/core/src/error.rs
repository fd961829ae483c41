use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EchError {
    #[error("invalid number `{0}`: {1}")]
    Parse(String, String),

    #[error("negative value {0} where a nonnegative scalar is required")]
    Negative(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("weight expansion did not terminate within {limit} steps; residual region {residual}")]
    NonTermination { limit: usize, residual: String },

    #[error("realization refused: total multiplicity {total} exceeds the limit {limit}")]
    RealizationTooLarge { total: String, limit: u64 },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("capacity index k = 0 is not allowed here")]
    ZeroIndex,

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("point lies outside the image cone: recovered coordinate {index} = {value}")]
    OutsideCone { index: usize, value: String },

    #[error("parameter B_{index} = {value} gives an irrational weight B^(-{index}/2)")]
    NotRepresentable { index: usize, value: String },

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("integer overflow in {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, EchError>;
