use std::fmt;

use thiserror::Error;

use crate::simulator::SimulationState;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Input lies outside the domain of the operation (non-unit director, missing wall, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure in {what}: residual {residual:e}")]
    Numerical { what: String, residual: f64 },

    /// Singular symbol or ill-conditioned basis at a sample point.
    #[error("degenerate point: {0}")]
    Degenerate(String),

    /// Stable subspace of the half-line problem has the wrong dimension.
    #[error("structural failure: expected stable dimension {expected}, found {found}")]
    Structural { expected: usize, found: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("simulation diverged at t = {t}: {reason}")]
    Diverged {
        t: f64,
        reason: String,
        last_good: Box<SimulationState>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// I/O error that names the file involved.
    pub fn io_at(path: &std::path::Path, e: std::io::Error) -> Self {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    }
}

impl fmt::Debug for Error {
    // The diverged variant carries a full state; keep debug output readable.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Diverged { t, reason, .. } => f
                .debug_struct("Diverged")
                .field("t", t)
                .field("reason", reason)
                .finish_non_exhaustive(),
            other => write!(f, "{other}"),
        }
    }
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Domain(_) | Error::Precondition(_) | Error::Config(_) => 1,
            Error::Numerical { .. } | Error::Degenerate(_) | Error::Structural { .. } | Error::Diverged { .. } => 2,
            Error::Io(_) => 3,
        }
    }
}
