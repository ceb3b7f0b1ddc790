use std::fmt;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] scnv_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {}", path.display(), LineErrors(errors))]
    Manifest { path: PathBuf, errors: Vec<(usize, String)> },
    #[error("checkpoint {field}: {message}")]
    Checkpoint { field: String, message: String },
    #[error("{model}: {source}")]
    Run { model: String, source: Box<Error> },
    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn checkpoint(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Checkpoint {
            field: field.into(),
            message: message.into(),
        }
    }

    /// 2 for bad flags or settings, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Usage(_) | Error::Core(scnv_core::Error::Config(_)) => 2,
            Error::Run { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}

struct LineErrors<'a>(&'a [(usize, String)]);

impl fmt::Display for LineErrors<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            [(line, msg)] => write!(f, "line {line}: {msg}"),
            errors => {
                write!(f, "{} bad lines", errors.len())?;
                for (line, msg) in errors {
                    write!(f, "\n  line {line}: {msg}")?;
                }
                Ok(())
            }
        }
    }
}
