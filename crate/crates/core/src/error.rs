use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("singular configuration: {0}")]
    Singular(String),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("configuration is not stationary (gradient norm {residual:.3e})")]
    NotStationary { residual: f64 },
    #[error("eigensolver failed: {0}")]
    Eigen(String),
    #[error("no unstable direction in spectrum")]
    NoUnstableDirection,
    #[error("reduced Newton iteration did not converge (residual {residual:.3e})")]
    NoConvergence { residual: f64 },
    #[error("could not draw a nonsingular configuration after {0} attempts")]
    Sampling(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
