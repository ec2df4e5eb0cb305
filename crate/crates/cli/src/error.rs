use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver {solver} failed: {source}")]
    Solver {
        solver: String,
        #[source]
        source: c2flow::Error,
    },
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("verification failed: {0}")]
    Mismatch(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// Process exit status: 1 verification mismatch, 2 configuration,
    /// 3 divergence or numerical failure, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Mismatch(_) => 1,
            CliError::Config(_) => 2,
            CliError::Solver { source, .. } => match source {
                c2flow::Error::Domain(_) | c2flow::Error::Dimension(_) => 2,
                c2flow::Error::Divergence { .. } | c2flow::Error::Numerical(_) => 3,
            },
            CliError::Io { .. } => 4,
        }
    }
}
