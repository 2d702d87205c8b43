//! IO companion of `sighom-core`: scenario config files, solution and mesh
//! dumps, CSV/SVG report emission and the command implementations behind
//! the `sighom` binary.

pub mod commands;
pub mod config;
pub mod dump;
pub mod report;

use std::fmt;

/// Command-level error with a stable exit code: 2 validation, 3 solver,
/// 4 io (1 is reserved for failed verification/checks).
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Solver(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "error (validation): {msg}"),
            CliError::Solver(msg) => write!(f, "error (solver): {msg}"),
            CliError::Io(msg) => write!(f, "error (io): {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<sighom_core::Error> for CliError {
    fn from(e: sighom_core::Error) -> Self {
        use sighom_core::Error::*;
        match e {
            Validation(_) | Geometry(_) | Sweep(_) | NoEffectiveConductance => {
                CliError::Validation(e.to_string())
            }
            Assembly(_) | NonConvergence { .. } | NonsymmetricOperator | Conditioning(_)
            | Stall { .. } | PointLookup { .. } => CliError::Solver(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
