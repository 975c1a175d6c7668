use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient sample: need at least {required} observations, got {actual}")]
    InsufficientSample { required: usize, actual: usize },

    #[error("invalid sample value {value} at index {index}: travel times must be finite and > 0")]
    InvalidSampleValue { index: usize, value: f64 },

    #[error("brute-force oracle refuses n = {n} (limit {limit})")]
    SizeGuard { n: usize, limit: usize },

    #[error("{what} = {value} is outside its domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("non-finite integrand at p = {p}")]
    NonFiniteIntegrand { p: f64 },

    #[error("invalid quadrature: {0}")]
    Quadrature(String),

    #[error("degenerate summary: {0}")]
    Degenerate(String),

    #[error("invalid probability grid: {0}")]
    InvalidGrid(String),

    #[error("{what} did not converge (residual {residual:e})")]
    Solver { what: String, residual: f64 },

    #[error("coefficient of variation {cov} is infeasible for {family}")]
    Infeasible { family: String, cov: f64 },

    #[error("grid mismatch between estimate and truth curves")]
    GridMismatch,

    #[error("truth value {value} at grid index {index} is not positive")]
    NonPositiveTruth { index: usize, value: f64 },

    #[error("all {trials} trials failed; first failure: {first}")]
    AllTrialsFailed { trials: usize, first: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the error stems from user input (config, flags, malformed
    /// scenario) rather than a runtime failure.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::InvalidGrid(_) | Error::Json(_)
        )
    }
}
