//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by graph ingestion, flow computation, and metrics.
#[derive(Debug, Error)]
pub enum Error {
    /// A line of an edge-list or partition file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Structurally valid input that violates a documented precondition.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Iterative solver failed to reach the requested tolerance.
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// A quantity is undefined for the given input (all-tied ranking,
    /// degenerate degree distribution, empty flow, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Link rewiring could not place a replacement link within the retry
    /// budget (dense or tiny graphs).
    #[error("rewiring failed: no admissible replacement after {attempts} attempts")]
    RewiringExhausted { attempts: usize },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
