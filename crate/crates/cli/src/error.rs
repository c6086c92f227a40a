use thiserror::Error;

/// CLI failure. [`CliError::exit_code`] gives 2 for usage and configuration
/// problems and 1 for failures during computation or output.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{field}: {message}")]
    Config { field: String, message: String },

    #[error("{0}")]
    Compute(#[from] otto_core::Error),

    #[error("{0}")]
    Io(String),

    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config { field: field.into(), message: message.into() }
    }

    #[cfg(test)]
    pub fn field(&self) -> Option<&str> {
        match self {
            CliError::Config { field, .. } => Some(field),
            _ => None,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 2,
            _ => 1,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config { .. } => "config",
            CliError::Compute(_) => "compute",
            CliError::Io(_) => "io",
            CliError::Failed(_) => "failed",
        }
    }

    /// `error[<tag>] <message>` on one line.
    pub fn line(&self) -> String {
        let msg = self.to_string().split_whitespace().collect::<Vec<_>>().join(" ");
        format!("error[{}] {msg}", self.tag())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
