use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation { .. } | CliError::Io { .. } => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

/// Maps an engine error raised while running `context`.
pub fn from_core(context: &str, e: premia::Error) -> CliError {
    if e.is_numerical() {
        CliError::Numerical(format!("{context}: {e}"))
    } else {
        CliError::Validation {
            field: context.to_string(),
            reason: e.to_string(),
        }
    }
}
