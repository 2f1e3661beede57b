use thiserror::Error;

/// Errors raised by the engine. Check failures are reported as data in the
/// various report types, never through this enum.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected} states, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: String, reason: String },

    #[error("missing field `{field}` required by {kind}")]
    MissingField { field: String, kind: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("non-coercive instance: {0}")]
    NonCoercive(String),

    #[error("degenerate premium: {0}")]
    Degenerate(String),

    #[error("arbitrage / no martingale measure: {0}")]
    Arbitrage(String),

    #[error("linear program infeasible: {0}")]
    Infeasible(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("grid too large: {points} points exceeds the limit of {limit}")]
    GridTooLarge { points: f64, limit: f64 },
}

impl Error {
    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn missing(field: &str, kind: impl std::fmt::Debug) -> Self {
        Error::MissingField {
            field: field.to_string(),
            kind: format!("{kind:?}"),
        }
    }

    /// True for errors that stem from the numerics rather than from input
    /// validation (unbounded programs, non-coercive or degenerate instances).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonCoercive(_)
                | Error::Degenerate(_)
                | Error::Arbitrage(_)
                | Error::Infeasible(_)
                | Error::GridTooLarge { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
