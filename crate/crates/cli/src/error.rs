use std::path::PathBuf;

use thiserror::Error;
use weakval::wvxfmt::ParseError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: ParseError },
    #[error("bad range: {0}")]
    BadRange(String),
    #[error("inapplicable parameter: {0}")]
    InapplicableParam(String),
    #[error(transparent)]
    Core(#[from] weakval::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for bad input, 3 for physics-domain failures, 4 for IO.
    pub fn exit_code(&self) -> i32 {
        use weakval::Error as E;
        match self {
            CliError::Parse { .. } | CliError::BadRange(_) | CliError::InapplicableParam(_) => 2,
            CliError::Core(
                E::DegenerateOverlap { .. }
                | E::DegenerateBaseline
                | E::ZeroStrength
                | E::ZeroBaseline(_)
                | E::ImpossiblePostselection
                | E::RouteMismatch { .. },
            ) => 3,
            CliError::Core(_) => 2,
            CliError::Io { .. } => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}
