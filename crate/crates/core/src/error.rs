use thiserror::Error;

/// Errors produced by the measure, transport and martingale routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{points} points but {weights} weights")]
    LengthMismatch { points: usize, weights: usize },

    #[error("measure must have at least one atom with positive weight")]
    ZeroMass,

    #[error("negative weight {0}")]
    NegativeWeight(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("measures are not in convex order")]
    NotInConvexOrder,

    #[error("degenerate denominator: the two marginals coincide")]
    DegenerateDenominator,

    #[error("linear program hit the iteration limit ({0} pivots)")]
    IterationLimit(usize),

    #[error("optimizer did not converge: {0}")]
    NonConvergence(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
