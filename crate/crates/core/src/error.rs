//! Crate-wide error type.

use std::fmt;

/// Errors produced by grid construction, model evaluation, subproblem
/// solvers and the driver.
#[derive(Debug)]
pub enum Error {
    /// A precondition on an argument was violated.
    InvalidArgument(String),
    /// Two fields (or a field and a gradient) live on different grids.
    GridMismatch(String),
    /// A patch set fails the cover or strong-overlap requirement.
    CoverViolation(String),
    /// A patch exceeds the size cap of an exact subproblem solver.
    PatchTooLarge { cells: usize, cap: usize },
    /// A linear solve did not reach the required residual.
    SolverFailure(String),
    /// A run configuration is malformed or inconsistent.
    Config(String),
    Io(std::io::Error),
    Json(serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::GridMismatch(msg) => write!(f, "grid mismatch: {msg}"),
            Error::CoverViolation(msg) => write!(f, "patch cover violation: {msg}"),
            Error::PatchTooLarge { cells, cap } => write!(
                f,
                "patch too large for the exact subproblem solver ({cells} cells, cap {cap}); \
                 increase the number of patches so each patch gets smaller"
            ),
            Error::SolverFailure(msg) => write!(f, "solver failure: {msg}"),
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
            Error::Json(e) => write!(f, "json error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            Error::Json(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e)
    }
}
