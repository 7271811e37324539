//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Model parameters outside the admissible range (λ ≤ 1, unsupported dimension, ...).
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// Grid descriptor is inconsistent (zero extent, asymmetric reflection axis, ...).
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// A coverage or support precondition of an operator is violated.
    #[error("coverage check failed: {0}")]
    Coverage(String),

    /// Requested evaluation point lies outside the stored data (no extrapolation).
    #[error("point outside data domain: {0}")]
    OutOfDomain(String),

    /// Operation parameter not supported (Bessel order, axis index, ...).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Dense probe matrix would exceed the configured size limit.
    #[error("probe matrix too large: {rows} x {cols} (limit {limit} entries)")]
    ProbeTooLarge {
        rows: usize,
        cols: usize,
        limit: usize,
    },

    /// Metadata in a sidecar file contradicts the run configuration.
    #[error("metadata mismatch: {0}")]
    MetadataMismatch(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("metadata parse error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
