//! Heston's stochastic-volatility model with piecewise-constant parameters.
//!
//! The joint characteristic function of log-price and variance is
//! exponential-affine in the starting state, so the transform over a horizon
//! split into periods of constant parameters is obtained by feeding each
//! period's variance coefficient into the preceding period as its terminal
//! condition. On top of that composition this crate provides
//!
//! - Fourier-inversion pricing of vanilla options ([`transform_pricing`]),
//! - forward-start options and forward-skew surfaces ([`forward_start`]),
//! - bootstrap calibration of a parameter term structure to a volatility
//!   surface ([`calibration`]),
//! - an Euler Monte Carlo simulator used as an independent check ([`mc_oracle`]).

pub mod calibration;
pub mod case_study;
pub mod error;
pub mod forward_start;
pub mod heston_cf;
pub mod mc_oracle;
pub mod tenor;
pub mod term_structure;
pub mod transform_pricing;

pub use calibration::{
    bootstrap_calibrate, quotes_from_surface, Bounds, CalibrationConfig, CalibrationResult, ForwardCurve, QuoteGrid,
    VolSurface,
};
pub use error::{Error, Result};
pub use heston_cf::{evaluate_cf, period_coeffs, CfCoeffs, PeriodParams};
pub use forward_start::{forward_skew, forward_start_coeffs, forward_start_price, ForwardStartSpec, SkewSurface};
pub use mc_oracle::{mc_vanilla_price, simulate_terminal, McConfig, Scheme};
pub use tenor::Tenor;
pub use term_structure::{cf_coeffs_to, marginal_cf, Period, TermStructure};
pub use transform_pricing::{black_scholes_price, implied_vol, vanilla_price, InversionConfig, VanillaSpec};
