use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid rate {0}: rates must be strictly positive")]
    InvalidRate(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-unique steady state: two smallest singular values {0:.3e} and {1:.3e} are both below threshold")]
    NonUniqueSteadyState(f64, f64),

    #[error("linear solver failed after {iterations} iterations (relative residual {residual:.3e})")]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("eigendecomposition did not converge")]
    Diagonalization,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("step size underflow at t = {t:.6e} (h = {h:.3e}); the lab-frame equation is too stiff here, use the rotating-frame solver")]
    Stiffness { t: f64, h: f64 },

    #[error("long-time average not stationary for `{label}`: first half {first:.6e}, second half {second:.6e}")]
    NotStationary { label: String, first: f64, second: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn at_iteration(self, iteration: usize) -> Self {
        Error::AtIteration {
            iteration,
            source: Box::new(self),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
