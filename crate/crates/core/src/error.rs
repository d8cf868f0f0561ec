use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sample grid {n_theta}x{n_phi} too small (need n_theta >= 2, n_phi >= 4)")]
    ResolutionTooSmall { n_theta: usize, n_phi: usize },

    #[error("expected 9 coefficients, got {0}")]
    WrongLength(usize),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid descent configuration: {0}")]
    InvalidConfig(String),

    #[error("quaternion has zero or non-finite norm")]
    DegenerateQuaternion,

    #[error("malformed coefficient file: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
