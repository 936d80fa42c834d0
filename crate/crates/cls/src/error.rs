use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] cls_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}, row {row}: {message}", path.display())]
    Parse { path: PathBuf, row: usize, message: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{failed} of {total} replicates failed at similarity {similarity}: {first}")]
    TooManyFailures { similarity: f64, failed: usize, total: usize, first: String },
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// 2 for numerical failures, 1 for everything caused by the input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Core(
                cls_core::Error::NonFinite(_) | cls_core::Error::Numerical(_) | cls_core::Error::Diverged { .. },
            )
            | Error::TooManyFailures { .. } => 2,
            _ => 1,
        }
    }
}
