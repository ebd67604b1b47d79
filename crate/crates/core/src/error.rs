use thiserror::Error;

/// Errors raised by the pricing, calibration and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical singularity in {0}")]
    NumericalSingularity(&'static str),

    #[error("time {t} is beyond the term-structure horizon {horizon}")]
    OutOfHorizon { t: f64, horizon: f64 },

    #[error("quadrature did not converge after {panels} panels (partial estimate {partial})")]
    QuadratureFailure { panels: usize, partial: f64 },

    #[error("degenerate forward: normalizer modulus {0:e}")]
    DegenerateForward(f64),

    #[error("no implied volatility for price {price} (bounds [{lower}, {upper}])")]
    NoSolution { price: f64, lower: f64, upper: f64 },

    #[error("data error: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;
