use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("angular momentum j = {j} is not allowed: {reason}")]
    DisallowedBlock { j: String, reason: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate cycle: {0}")]
    Degenerate(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("did not converge: {0}")]
    NoConvergence(String),

    #[error("cost guard: {0}")]
    CostGuard(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
