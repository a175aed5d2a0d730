use thiserror::Error;

/// Errors raised anywhere in the regularization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("[A; L] is numerically rank deficient (rank {rank} < n = {n}); N(A) and N(L) intersect")]
    NonTrivialCommonNullspace { rank: usize, n: usize },

    #[error("rank(L) = {rank} exceeds the number of rows p = {p}")]
    RankExceedsRows { rank: usize, p: usize },

    #[error("invalid problem size: {0}")]
    BadSize(String),

    #[error("dense system is singular or not positive definite")]
    SingularSystem,

    #[error("all Fourier coefficients are zero")]
    DegenerateInput,

    #[error("sample of length {len} is too small (need at least {min})")]
    SampleTooSmall { len: usize, min: usize },

    #[error("Picard parameter k0 = {k0} outside [{lo}, {hi}]")]
    BadK0 { k0: usize, lo: usize, hi: usize },

    #[error("residual degrees of freedom T(λ) vanish at λ = {lambda}")]
    DegenerateT { lambda: f64 },

    #[error("objective is not finite at λ = {lambda} (value {value})")]
    NonFiniteObjective { lambda: f64, value: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
