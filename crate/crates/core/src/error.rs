use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the domain of the requested operation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Adaptive quadrature stopped before reaching the requested tolerance.
    #[error("quadrature did not converge for {context}: estimate {estimate}, error estimate {error:.3e}")]
    Quadrature {
        context: String,
        estimate: Complex64,
        error: f64,
    },

    /// The regularised integral diverges at the infrared floor.
    #[error("infrared divergence: integrand behaves as |w|^{exponent:.3} near the floor")]
    InfraredDivergent { exponent: f64 },

    #[error("power-law fit failed: {0}")]
    Fit(String),

    #[error("no crossover resolved: early slope {early:.4}, late slope {late:.4}")]
    NoCrossover { early: f64, late: f64 },

    #[error("trajectory {member} overflowed at step {step} (|x| = {value:.3e})")]
    Overflow { member: usize, step: usize, value: f64 },

    #[error("ensemble is not stationary: running-mean drift {drift:.3e} exceeds {bound:.3e}")]
    NonStationary { drift: f64, bound: f64 },

    #[error("{0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures of the numerics as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::InvalidParameter(_) | Error::Io(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
