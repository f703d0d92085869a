use std::path::PathBuf;
use std::process::ExitCode;

use subspace_qsl::QslError;

/// Everything the binary can fail with.
///
/// The exit-code contract is 2 for rejected input (unreadable or ill-formed
/// configs, bad flag values, non-Hermitian matrices) and 3 for numerical
/// breakdown inside a solver. Property violations found by `verify` are not
/// errors; they exit 1 through the normal result path.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}: {detail}", path.display())]
    Malformed { path: PathBuf, detail: String },

    #[error("energy levels are equal ({level}); the two-level example needs a gap")]
    DegenerateLevels { level: f64 },

    #[error(transparent)]
    Core(#[from] QslError),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Core(e) if e.is_numerical() => ExitCode::from(3),
            _ => ExitCode::from(2),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
