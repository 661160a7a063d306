use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] rnorm_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// Malformed input file; `line` is 1-based, 0 when the problem is not tied to a line.
    #[error("{}{}: {message}", path.display(), if *line > 0 { format!(":{line}") } else { String::new() })]
    Data {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{0}")]
    Output(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn data(path: &Path, line: usize, message: impl Into<String>) -> Self {
        Error::Data {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    /// 1 for usage and parameter problems, 2 for bad or unreadable data, 3 for numerical failure.
    pub fn exit_code(&self) -> u8 {
        use rnorm_core::Error as Core;
        match self {
            Error::Usage(_) | Error::Core(Core::Parameter(_)) => 1,
            Error::Core(Core::SingularFactor { .. }) => 3,
            Error::Core(_) | Error::Io { .. } | Error::Data { .. } | Error::Output(_) => 2,
        }
    }
}

impl From<&Error> for ExitCode {
    fn from(e: &Error) -> Self {
        ExitCode::from(e.exit_code())
    }
}
