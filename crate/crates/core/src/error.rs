use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("binomial coefficient C({n}, {k}) overflows u64")]
    Overflow { n: u64, k: u64 },

    #[error("inner product of polynomials with mixed parity (degrees {0} and {1})")]
    MixedParity(u32, u32),

    #[error("point is not on the unit sphere (norm {norm})")]
    NonUnit { norm: f64 },

    #[error("Gram matrix is ill-conditioned (condition number {condition:.3e} exceeds {limit:.1e})")]
    IllConditioned { condition: f64, limit: f64 },

    #[error("degree {0} must be odd")]
    EvenDegree(u32),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("LP solver degenerate: {0}")]
    Degenerate(String),

    #[error("step {delta:e} exceeds the admissible bound {bound:e}")]
    StepOutOfRange { delta: f64, bound: f64 },

    #[error("query has no analytic expectation on this source")]
    NoExactExpectation,

    #[error("query value {0} is not finite")]
    UnboundedQuery(f64),

    #[error("record format: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
