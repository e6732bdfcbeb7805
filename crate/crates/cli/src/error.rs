use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad or missing input; exit code 1.
    #[error("{0}")]
    Validation(String),
    /// A numerical procedure failed on valid input; exit code 2.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<polyhom_core::Error> for CliError {
    fn from(e: polyhom_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

/// Routes any module error through the crate-level classification.
pub fn core<E: Into<polyhom_core::Error>>(e: E) -> CliError {
    CliError::from(e.into())
}
