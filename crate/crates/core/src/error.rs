use thiserror::Error;

/// Errors produced by the transmit model, the detectors and the harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Constellation order outside the supported set {4, 16, 64, 256}.
    #[error("unsupported QAM order {0}: expected one of 4, 16, 64, 256")]
    UnsupportedOrder(usize),

    /// Bit stream length incompatible with the constellation.
    #[error("bit length {len} is not a positive multiple of {bits_per_symbol} bits/symbol")]
    BadBitLength { len: usize, bits_per_symbol: usize },

    /// Matrix or vector dimensions do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Invalid scalar or structural parameter.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A column of the channel matrix carries no energy.
    #[error("channel column {0} is identically zero")]
    ZeroColumn(usize),

    /// A linear system that must be Hermitian positive definite was not.
    #[error("matrix is singular or not positive definite")]
    SingularMatrix,

    /// Exhaustive ML search would exceed the configured candidate budget.
    #[error("ML search needs {needed} candidates, budget is {budget}")]
    MlBudgetExceeded { needed: u128, budget: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;
