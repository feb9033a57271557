use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// Why a pair of bodies cannot be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularityKind {
    /// The two bodies coincide.
    Collision,
    /// The two bodies are antipodal on the sphere.
    Antipodal,
}

impl fmt::Display for SingularityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SingularityKind::Collision => f.write_str("collision"),
            SingularityKind::Antipodal => f.write_str("antipodal singularity"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("infeasible radius r = {r}: the sphere requires r <= 1")]
    InfeasibleRadius { r: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("{kind} between bodies {i} and {j}")]
    Singularity { i: usize, j: usize, kind: SingularityKind },

    #[error("angular-velocity balance needs a nonzero trailing block (great-circle configuration)")]
    RadialBalanceUndefined,

    #[error("non-finite state produced at t = {time}")]
    NumericalFailure { time: f64 },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("configuration rejected:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::InvalidInput(_)
            | Error::InfeasibleRadius { .. }
            | Error::InvalidConfiguration(_)
            | Error::RadialBalanceUndefined
            | Error::Config(_) => 2,
            Error::Singularity { .. } | Error::NumericalFailure { .. } => 3,
            Error::NoSolution(_) => 4,
            Error::Parse { .. } | Error::Io(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
