use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("frame error: {0}")]
    Frame(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("model error: {0}")]
    Model(String),
    #[error("target not attained{}: {reason}", step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    NotAttained { step: Option<usize>, reason: String },
    #[error("target {index} violates an affine relation (residual {residual:.3e})")]
    RelationMismatch { index: usize, residual: f64 },
    #[error("block {block} unsupported: {reason}")]
    UnsupportedBlock { block: usize, reason: String },
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn not_attained(reason: impl Into<String>) -> Self {
        Error::NotAttained { step: None, reason: reason.into() }
    }

    /// Attach a step index to a `NotAttained` coming out of an inner call.
    pub(crate) fn at_step(self, step: usize) -> Self {
        match self {
            Error::NotAttained { reason, .. } => Error::NotAttained { step: Some(step), reason },
            other => other,
        }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Geometry(_) | Error::Model(_) | Error::RelationMismatch { .. } => 1,
            Error::NotAttained { .. } | Error::UnsupportedBlock { .. } | Error::Internal(_) => 2,
            Error::Input(_) | Error::Frame(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
