//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by scenario handling, planning, and the oracles.
#[derive(Debug, Error)]
pub enum Error {
    /// A domain invariant or precondition failed; `field` names the
    /// offending input.
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    /// A scenario file could not be parsed.
    #[error("scenario parse error: {0}")]
    Parse(String),

    /// A scenario file carries an unsupported schema version.
    #[error("unsupported schema_version {found} (this build reads version {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    /// The instance admits no feasible plan at all.
    #[error("infeasible scenario: {0}")]
    Infeasible(String),

    /// A brute-force oracle refused an instance above its size guard.
    #[error("oracle bound exceeded: {0}")]
    OracleBound(String),

    /// A fitness evaluation failed inside the DE loop.
    #[error("fitness evaluation failed at generation {generation}, individual {individual}: {reason}")]
    Fitness {
        generation: usize,
        individual: usize,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
