use std::path::Path;

use coopbasin::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 2 input, 3 infeasible design, 4 estimation failure, 5 IO.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                Error::Infeasible(_) => 3,
                Error::Separation(_)
                | Error::NotConverged { .. }
                | Error::TooFewClusters { .. }
                | Error::MissingCell(_) => 4,
                _ => 2,
            },
            CliError::Io { .. } => 5,
            CliError::Usage(_) => 2,
        }
    }
}
