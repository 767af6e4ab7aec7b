use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the solver and diagnostic pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArg(String),
    #[error("rejected geometry: {0}")]
    RejectedGeometry(String),
    #[error("region out of range: {0}")]
    RegionOutOfRange(String),
    #[error("field does not belong to this mesh (expected n={expected_dim}, N={expected_size}; got n={dim}, N={size})")]
    MeshMismatch {
        expected_dim: usize,
        expected_size: usize,
        dim: usize,
        size: usize,
    },
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("non-finite energy encountered")]
    NonFiniteEnergy,
    #[error("degenerate model: {0}")]
    DegenerateModel(String),
    #[error("test function must vanish on BAND and EXTERIOR nodes ({count} nonzero)")]
    UnsupportedTestFunction { count: usize },
    #[error("line search stalled at iteration {iteration} (step fell below {min_step:e})")]
    LineSearchStall { iteration: usize, min_step: f64 },
    #[error("system too large: {0}")]
    TooLarge(String),
    #[error("factorization failed at pivot {pivot} (value {value:e})")]
    SingularSystem { pivot: usize, value: f64 },
    #[error("radius {radius} is below the resolution floor {floor}")]
    RadiiTooFine { radius: f64, floor: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("degenerate denominator: {0}")]
    DegenerateDenominator(String),
    #[error("no grid nodes in region of radius {0}")]
    EmptyRegion(f64),
    #[error("invalid lemma parameters: {0}")]
    InvalidParams(String),
    #[error("no (tau*R, R) sample pair matched within tolerance {0}")]
    NoMatchingPairs(f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid value for `{key}`: {reason}")]
    Validation { key: String, reason: String },
    #[error("format error in {path}: {reason}")]
    Format { path: PathBuf, reason: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Failure classes used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Solver,
    Diagnostics,
    Io,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            InvalidArg(_) | RejectedGeometry(_) | MeshMismatch { .. } | Parse(_) | Validation { .. } => {
                ErrorClass::Config
            }
            NonFinite(_) | NonFiniteEnergy | DegenerateModel(_) | LineSearchStall { .. } | TooLarge(_)
            | SingularSystem { .. } => ErrorClass::Solver,
            RegionOutOfRange(_)
            | UnsupportedTestFunction { .. }
            | RadiiTooFine { .. }
            | InsufficientData(_)
            | DegenerateDenominator(_)
            | EmptyRegion(_)
            | InvalidParams(_)
            | NoMatchingPairs(_) => ErrorClass::Diagnostics,
            Format { .. } | Io { .. } => ErrorClass::Io,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn validation(key: &str, reason: impl Into<String>) -> Self {
        Error::Validation {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
