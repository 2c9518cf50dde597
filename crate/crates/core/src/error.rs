use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulator and its file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("projection has vanishing norm ({norm:.3e})")]
    ZeroProjection { norm: f64 },

    #[error("filter success probability vanishes ({probability:.3e})")]
    ZeroSuccess { probability: f64 },

    #[error("direction norm {norm:.3e} is below threshold {threshold:.3e}")]
    DegenerateDirection { norm: f64, threshold: f64 },

    #[error("relative phase denominator {value:.3e} is degenerate")]
    DegenerateDenominator { value: f64 },

    #[error("correlation {0} already recorded")]
    DuplicateIndex(String),

    #[error("correlation {0} is not a full correlation")]
    NonFullCorrelation(String),

    #[error("unsupported number of qubits: {0}")]
    UnsupportedDimension(usize),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Input problems (malformed specs, bad files, out-of-domain arguments)
    /// as opposed to numerical failures.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::Parse(_)
                | Error::Io { .. }
                | Error::Json(_)
                | Error::Csv(_)
                | Error::DimensionMismatch { .. }
                | Error::UnsupportedDimension(_)
                | Error::InvalidState(_)
        )
    }
}
