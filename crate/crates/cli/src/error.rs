use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, malformed or inconsistent configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] tvplan::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("validation failed: {0}")]
    Validation(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 0 success, 2 no path, 3 configuration, 4 domain/horizon; 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        use tvplan::Error as E;
        match self {
            CliError::Config(_) | CliError::Core(E::InvalidArgument(_)) => 3,
            CliError::Core(E::NoPath | E::NoFeasibleDeparture) => 2,
            CliError::Core(E::OutsideWindow { .. } | E::Simulation { .. } | E::Integration(_)) => 4,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
