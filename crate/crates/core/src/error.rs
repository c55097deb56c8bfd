use std::path::PathBuf;

use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid exponent p = {0}: expected p >= 1 or p = inf")]
    InvalidExponent(f64),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("kernel radius {radius} is below 2h = {min}")]
    UnderResolvedKernel { radius: f64, min: f64 },

    #[error("operation requires dimension {expected}, grid has dimension {found}")]
    UnsupportedDimension { expected: usize, found: usize },

    #[error("potential evaluated at an atom location")]
    SingularEvaluation,

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("invalid nonlinearity: {0}")]
    InvalidNonlinearity(String),

    #[error("invalid sub/supersolution bracket: {0}")]
    InvalidBracket(String),

    #[error("invalid supersolution: {0}")]
    InvalidSupersolution(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("cost unavailable: state equation did not converge ({0})")]
    CostUnavailable(Box<Error>),

    #[error("reduced-limit level {level} failed: {source}")]
    ReducedLimitFailed {
        level: usize,
        /// Records of the levels that did converge.
        trace: Vec<crate::solver::LevelRecord>,
        #[source]
        source: Box<Error>,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }
}
