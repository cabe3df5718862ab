use thiserror::Error;

/// Errors raised by evaluation, design and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// Every binomial count in the pilot was zero, so the sample says nothing about N.
    #[error("degenerate pilot sample: all binomial counts are zero after {redraws} redraws")]
    DegeneratePilot { redraws: u32 },

    #[error("{what}: tolerance {tolerance:e} not met (error estimate {estimate:e})")]
    ToleranceNotMet {
        what: &'static str,
        tolerance: f64,
        estimate: f64,
    },

    #[error("sequential stopping rule still running at k = {cap}")]
    RunawayStoppingRule { cap: u64 },

    #[error("{aborted} of {replicas} replicas aborted; first failure: {first}")]
    TooManyAborts {
        aborted: usize,
        replicas: usize,
        first: String,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("probability must lie in (0, 1), got {p}")))
    }
}
