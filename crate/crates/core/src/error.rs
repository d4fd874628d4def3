//! Error type shared across the toolkit.

use thiserror::Error;

/// Toolkit-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input file; names the record or line that failed.
    #[error("parse error in {path} at {location}: {message}")]
    Parse {
        path: String,
        location: String,
        message: String,
    },

    /// Data violates a documented invariant (non-finite coordinate,
    /// bad joint count, inconsistent metadata, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// Tensor or vector dimensions do not conform.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Preprocessing could not be applied (degenerate axes, missing joints).
    #[error("preprocessing error: {0}")]
    Preprocess(String),

    /// Invalid configuration value or unknown configuration key.
    #[error("config error: {0}")]
    Config(String),

    /// A model was used before it was trained or with mismatched dimensions.
    #[error("model error: {0}")]
    Model(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
