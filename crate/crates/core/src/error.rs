use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Numerical failures raised by the linear-model computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("matrix is numerically singular (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("degenerate fit: residual sum of squares {0:e} is not positive")]
    DegenerateFit(f64),

    #[error("near-singular update for column {column}: Schur complement {d:e}")]
    NearSingular { column: usize, d: f64 },

    #[error("inconsistent state: {0}")]
    Inconsistent(String),

    #[error("model size {p_gamma} exceeds the rank guard n - 2 = {limit}")]
    RankGuard { p_gamma: usize, limit: usize },

    #[error("Bayes factor for column {column} is numerically undefined (ratio {ratio:e})")]
    Domain { column: usize, ratio: f64 },

    #[error("hyperparameter g must be fixed for this operation")]
    RandomG,

    #[error("operation needs a random g (half-Cauchy hyperprior)")]
    FixedG,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid dataset: {0}")]
    Data(String),

    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        column: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Dimension { path: PathBuf, message: String },

    #[error("value {value} outside the open interval ({lo}, {hi})")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("empty output: {0}")]
    EmptyOutput(&'static str),

    #[error("enumeration needs p <= {cap}, got p = {p}")]
    EnumerationCap { p: usize, cap: usize },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures that come from the numerics rather than the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Model(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
