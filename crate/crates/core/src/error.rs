use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CeedsError>;

#[derive(Debug, Error)]
pub enum CeedsError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("motif has {0} occurrence(s); at least 2 are needed")]
    InsufficientOccurrences(usize),

    #[error("modal period {period} is shorter than motif length {motif_len}")]
    PeriodTooShort { period: usize, motif_len: usize },

    #[error("no cancellation candidate available")]
    NoCandidate,

    #[error("degenerate fit: all calibration duties are equal")]
    DegenerateFit,

    #[error("transfer function is not invertible (slope {0})")]
    NonInvertible(f64),

    #[error("waveform parse error in segment {position} ({segment:?}): {reason}")]
    WaveformParse {
        position: usize,
        segment: String,
        reason: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("reduction undefined: baseline absolute error sum is zero")]
    UndefinedMetric,

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CeedsError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        CeedsError::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CeedsError::Io {
            path: path.into(),
            source,
        }
    }
}
