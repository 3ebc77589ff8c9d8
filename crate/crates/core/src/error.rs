use thiserror::Error;

use crate::fractal::ValidationReport;

/// How a failure should be reported to a caller (and mapped to a process exit code).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    InvalidInput,
    Numerical,
    Consistency,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::InvalidInput => 1,
            ErrorKind::Numerical => 2,
            ErrorKind::Consistency => 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid fractal triple: {0}")]
    InvalidTriple(ValidationReport),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown builtin fractal `{0}` (known: gasket, vicsek, tree_gasket)")]
    UnknownBuiltin(String),

    #[error("dimension mismatch: expected {expected}, got {found} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("form is not irreducible (support graph disconnected)")]
    NotIrreducible,

    #[error("form is not positive (coefficient {0:?} vanishes)")]
    NotPositive((usize, usize)),

    #[error("singular interior block: vertex {vertex} has no conductance path to the constrained set")]
    SingularInterior { vertex: usize },

    #[error("singular linear system ({0})")]
    SingularSystem(&'static str),

    #[error("{what} did not converge within {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("not an eigenform: {0}")]
    NotEigenform(String),

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidTriple(_)
            | Error::InvalidInput(_)
            | Error::UnknownBuiltin(_)
            | Error::DimensionMismatch { .. }
            | Error::NotIrreducible
            | Error::NotPositive(_)
            | Error::NotEigenform(_)
            | Error::Io(_)
            | Error::Json(_) => ErrorKind::InvalidInput,
            Error::SingularInterior { .. }
            | Error::SingularSystem(_)
            | Error::NonConvergence { .. } => ErrorKind::Numerical,
            Error::Consistency(_) => ErrorKind::Consistency,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
