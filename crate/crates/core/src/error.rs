use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A constructor or option was given an out-of-range value.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite potential value at x = {x:?}")]
    NonFinitePotential { x: Vec<f64> },

    /// `|dU/dx_i|` exceeded the declared bound. The bound drives the
    /// dominating kernel, so this is never clipped.
    #[error("gradient bound violated: |dU/dx_{coord}| = {value} > {bound} at x = {x:?}")]
    GradBoundViolation {
        x: Vec<f64>,
        coord: usize,
        value: f64,
        bound: f64,
    },

    /// A thinning acceptance probability came out above one.
    #[error(
        "thinning invariant violated: log acceptance {log_prob} > 0 at x = {x:?}, \
         coordinate {coord} -> {new_value}"
    )]
    ThinningViolation {
        x: Vec<f64>,
        coord: usize,
        new_value: f64,
        log_prob: f64,
    },

    #[error("path left the domain box at time {time}: x = {x:?}")]
    DomainExit { time: f64, x: Vec<f64> },

    #[error("non-finite state during integration at step {step}")]
    Integration { step: usize },

    #[error("quadrature did not converge on [{lo}, {hi}]: estimate {value}, error {error} after {intervals} intervals")]
    Quadrature {
        lo: f64,
        hi: f64,
        value: f64,
        error: f64,
        intervals: usize,
    },

    #[error("path {index}: {source}")]
    Path {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    /// Caller passed inputs that do not fit together.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}
