use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("{quantity} = {value} is at or below the guard {guard}")]
    DivisionGuard {
        quantity: &'static str,
        value: f64,
        guard: f64,
    },

    #[error("singular denominator in the empirical Cp model ({0})")]
    SingularDenominator(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid turbine parameters: {0}")]
    InvalidParams(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("constant feature `{0}` cannot be standardized")]
    ConstantFeature(String),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("malformed file {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },

    #[error("no parseable rows in {0}")]
    NoRows(PathBuf),

    #[error("model format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("non-finite loss in batch rows {start}..{end}")]
    NonFiniteLoss { start: usize, end: usize },

    #[error("training diverged at epoch {epoch}")]
    Diverged {
        epoch: usize,
        history: crate::nn::History,
    },

    #[error("least-squares fit failed: {0}")]
    FitFailed(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

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

    /// True for errors caused by bad configuration or bad input files, as
    /// opposed to failures while computing.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::MissingColumn(_)
                | Error::Malformed { .. }
                | Error::NoRows(_)
                | Error::Io { .. }
                | Error::Csv(_)
                | Error::Json(_)
                | Error::VersionMismatch { .. }
                | Error::InvalidParams(_)
                | Error::InvalidShape(_)
        )
    }
}
