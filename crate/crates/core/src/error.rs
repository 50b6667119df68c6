use std::path::PathBuf;

/// Errors produced by the evaluation core.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("{}", format_location(path, *line, *column, message))]
    Format {
        path: Option<PathBuf>,
        line: usize,
        column: Option<usize>,
        message: String,
    },

    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("invalid manifest {}: {message}", path.display())]
    InvalidManifest { path: PathBuf, message: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("storage error: {0}")]
    Storage(String),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attaches a file path to a [`Error::Format`] that was raised while
    /// parsing an in-memory buffer.
    pub fn with_path(self, p: impl Into<PathBuf>) -> Self {
        match self {
            Error::Format {
                path: None,
                line,
                column,
                message,
            } => Error::Format {
                path: Some(p.into()),
                line,
                column,
                message,
            },
            other => other,
        }
    }

    /// True for errors caused by the caller's data or arguments rather than
    /// by the environment.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, Error::Storage(_) | Error::Io { .. })
    }
}

fn format_location(
    path: &Option<PathBuf>,
    line: usize,
    column: Option<usize>,
    message: &str,
) -> String {
    let mut s = String::from("format error");
    if let Some(p) = path {
        s.push_str(&format!(" in {}", p.display()));
    }
    s.push_str(&format!(" at line {line}"));
    if let Some(c) = column {
        s.push_str(&format!(", column {c}"));
    }
    s.push_str(": ");
    s.push_str(message);
    s
}

pub type Result<T> = std::result::Result<T, Error>;
