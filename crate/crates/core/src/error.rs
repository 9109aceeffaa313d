use thiserror::Error;

/// Errors raised by the energy laboratory.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// A function was evaluated outside its domain (e.g. a kernel at the origin).
    #[error("domain error: {0}")]
    Domain(String),

    /// The threshold prefactor `1/2 - (1+eps)^-k` is not positive.
    #[error("degenerate prefactor: 1/2 - (1+epsilon)^-{exponent} = {value:e} <= 0")]
    DegeneratePrefactor { exponent: f64, value: f64 },

    /// A precondition on the inputs of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An integral diverges for the requested configuration.
    #[error("integral diverges: {0}")]
    NonIntegrable(String),

    /// The root bracket could not be established.
    #[error("root bracketing failed after {steps} steps (last probe x = {x:e}, phi = {phi:e})")]
    Bracket { steps: usize, x: f64, phi: f64 },

    /// Malformed input file.
    #[error("parse error in {source_name} line {line}: {reason}")]
    Parse {
        source_name: String,
        line: usize,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
