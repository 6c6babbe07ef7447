use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("tail combination is not representable: {0}")]
    NonRepresentableTail(String),
    #[error("tail of growth exponent {alpha} is not integrable against the kernel for sp = {sp}, p = {p}")]
    TailNotIntegrable { alpha: f64, sp: f64, p: f64 },
    #[error("evaluation point outside the admissible region: {0}")]
    PointOutOfRange(String),
    #[error("unknown profile family `{0}`")]
    UnknownProfile(String),
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
    #[error("hypothesis not satisfied: {0}")]
    Inapplicable(String),
    #[error("certificate failed: {0}")]
    CertificateFailed(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
    #[error("malformed data file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
