use std::io;
use std::path::{Path, PathBuf};

/// Failures of the file-level tooling. [`Error::exit_code`] maps each to the
/// process exit status.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] voxanchor_core::Error),
    #[error("{}: file not found", .0.display())]
    MissingFile(PathBuf),
    #[error("{}:{line}: {msg}", path.display())]
    Parse { path: PathBuf, line: u64, msg: String },
    #[error("{}: {msg}", path.display())]
    Invalid { path: PathBuf, msg: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// 1 for bad input, 2 for failures of the tool or the environment.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Internal(_) => 2,
            _ => 1,
        }
    }

    /// Attaches a file to a library error.
    pub fn in_file(path: &Path, err: impl Into<Error>) -> Error {
        match err.into() {
            Error::Core(e) => Error::Invalid { path: path.to_path_buf(), msg: e.to_string() },
            other => other,
        }
    }
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(io::Error) -> Error + '_ {
    move |source| {
        if source.kind() == io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::Io { path: path.to_path_buf(), source }
        }
    }
}
