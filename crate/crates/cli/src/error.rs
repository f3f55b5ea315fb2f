use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Core {
        context: &'static str,
        #[source]
        source: tsagg_core::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    pub fn core(context: &'static str) -> impl FnOnce(tsagg_core::Error) -> CliError {
        move |source| CliError::Core { context, source }
    }

    /// Process exit status: 2 for invalid input, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core { source, .. } => match source {
                tsagg_core::Error::Quadrature { .. } | tsagg_core::Error::Normalization { .. } => 3,
                _ => 2,
            },
            CliError::Io { .. } | CliError::Output(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
