use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input lies outside the physical domain of an operation.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// The round-trip gain r1*r2 reached unity, so the intracavity field has no steady state.
    #[error("divergent cavity: r1*r2 = {gain} >= 1")]
    Divergence { gain: f64 },

    /// An adaptive integral did not reach its tolerance.
    #[error("integral '{integral}' did not converge: estimated error {residual:e} exceeds {tolerance:e}")]
    NonConvergence {
        integral: String,
        residual: f64,
        tolerance: f64,
    },

    /// A scenario or database file could not be interpreted.
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    /// A scenario is missing something an operation needs.
    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            op,
            reason: reason.into(),
        }
    }
}

/// Returns a domain error unless `value` is finite and strictly positive.
pub(crate) fn require_positive(op: &'static str, name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(op, format!("{name} must be positive, got {value}")))
    }
}
