use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular parameters: {0}")]
    SingularParameter(String),

    /// The hopping `J_K` vanishes, so the momentum sector is flat.
    #[error("empty momentum sector at K = {k}: J_K vanishes")]
    EmptySector { k: f64 },

    #[error("incomplete bound band: no {branch} bound state at K = {k}")]
    IncompleteBand { k: f64, branch: &'static str },

    #[error("propagation accuracy lost: achieved residual {residual:e} exceeds {tolerance:e}")]
    Accuracy { residual: f64, tolerance: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
