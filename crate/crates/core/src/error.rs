use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("H_N^m is empty for (N, m) = ({n}, {m})")]
    EmptySpace { n: u32, m: i32 },
    #[error("point lies within {eps:e} rad of a chart pole (alpha = {alpha})")]
    ChartPole { alpha: f64, eps: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("equivariance degree m = 0 is not supported here")]
    ZeroEquivariance,
    #[error("zero certification failed: {0}")]
    CertificationFailure(String),
    #[error("base point lies on the zero set of the section")]
    BaseOnZeroSet,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("degenerate vertex value could not be perturbed")]
    DegenerateVertex,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid basis cache file: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
