use std::path::PathBuf;

/// Errors of the IO, simulation and command-line layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Bad flags or configuration.
    #[error("{0}")]
    Usage(String),

    /// Malformed input data.
    #[error("{0}")]
    Data(String),

    /// Failure reading or writing a file.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Error raised by the estimation core.
    #[error(transparent)]
    Core(#[from] takayama_core::Error),
}

/// Result alias of this crate.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code: 1 usage, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        use takayama_core::Error as Core;
        match self {
            Error::Usage(_) => 1,
            Error::Data(_) | Error::Io { .. } => 2,
            Error::Core(e) => match e {
                Core::Quadrature { .. } | Core::VarianceAssembly { .. } => 3,
                Core::ConfidenceLevel(_)
                | Core::InvalidParameter(_)
                | Core::QuantileLevel(_)
                | Core::KernelArgument(_)
                | Core::RectangleBounds { .. } => 1,
                _ => 2,
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
