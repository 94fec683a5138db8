//! File formats, reports and the `qpdx` command line on top of `qpdx-core`.
//!
//! Every command writes a report whose `payload` is byte-identical across
//! runs with the same settings and inputs; only `meta` carries the time.
//! Exit status is 0 on success, 1 on invalid input or usage and 2 when the
//! solver stops without an optimal point.

use std::path::{Path, PathBuf};

pub mod builtin;
pub mod cli;
pub mod commands;
pub mod formats;
pub mod report;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// Carries serde's line, column and field diagnostics.
    #[error("{}: {source}", path.display())]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] qpdx_core::Error),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    /// A core error raised while reading `path`.
    pub fn at(path: &Path, e: qpdx_core::Error) -> Self {
        Self::Validation(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(qpdx_core::Error::Solver(_)) => 2,
            _ => 1,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Output(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qpdx_core::sdp::SolveStatus;

    #[test]
    fn exit_codes() {
        assert_eq!(
            CliError::Core(qpdx_core::Error::Solver(SolveStatus::IterationLimit)).exit_code(),
            2
        );
        assert_eq!(CliError::Core(qpdx_core::Error::NonFinite).exit_code(), 1);
        assert_eq!(CliError::Validation("x".into()).exit_code(), 1);
    }
}
