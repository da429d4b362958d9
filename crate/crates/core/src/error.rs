use thiserror::Error;

/// Errors reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An integer result does not fit the output type.
    #[error("overflow: {0}")]
    Overflow(String),

    #[error("argument sequence too short: need {needed} entries, got {got}")]
    LengthMismatch { needed: usize, got: usize },

    /// A series failed to reach its tolerance within the term budget.
    #[error("series did not converge within {terms} terms")]
    NonConvergence { terms: usize },

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error(
        "quadrature did not converge: log value {partial_log_value:.6e}, \
         log-error {log_error_estimate:.3e} after {subdivisions} subdivisions"
    )]
    Quadrature {
        partial_log_value: f64,
        log_error_estimate: f64,
        subdivisions: usize,
    },

    #[error("derivative does not change sign on ({lo}, {hi})")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("derivative jet has order {have}, need at least {needed}")]
    JetOrder { needed: usize, have: usize },

    /// The truncated Laplace expansion has a non-positive partial sum.
    #[error("Laplace expansion partial sum {0:.6e} is not positive")]
    NegativeExpansion(f64),
}

impl Error {
    /// True for errors caused by the caller's arguments rather than by the numerics.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::LengthMismatch { .. }
                | Error::JetOrder { .. }
                | Error::NoSignChange { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
