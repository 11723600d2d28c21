//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LrdError {
    #[error("Hurst index must lie in (0, 1), got {0}")]
    InvalidHurst(f64),
    #[error("coefficient truncation length must be at least 2, got {0}")]
    TruncationTooShort(usize),
    #[error("lag {lag} out of range for truncation length {max}")]
    LagOutOfRange { lag: usize, max: usize },
    #[error("circulant embedding is not positive semi-definite (min eigenvalue {0:e})")]
    EmbeddingNotPsd(f64),
    #[error("Hermite order {0} exceeds limit 170")]
    OrderTooLarge(usize),
    #[error("functional is not integrable against the Gaussian weight (r = {0})")]
    NonIntegrable(f64),
    #[error("Hermite rank undefined: no coefficient above tolerance up to order {0}")]
    RankUndefined(usize),
    #[error("functional has infinite chaos-coefficient norm")]
    InfiniteVariance,
    #[error("no monotone tail decomposition available: {0}")]
    UnsupportedFunctional(String),
    #[error("functional does not have a power tail: {0}")]
    NoPowerTail(String),
    #[error("norming constants require n >= 2, got {0}")]
    NTooSmall(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("regime inconsistent with pipeline inputs: {0}")]
    RegimeMismatch(String),
    #[error("spatial grid too coarse: discretization bias {bias:e} exceeds budget {budget:e}")]
    GridTooCoarse { bias: f64, budget: f64 },
    #[error("degenerate rectangle for intensity test: {0}")]
    DegenerateRectangle(String),
    #[error("too few exceedances for blocks estimator ({0} < 50)")]
    TooFewExceedances(usize),
    #[error("time grid unsuitable for scaling regression: {0}")]
    GridUnsuitable(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LrdError>;
