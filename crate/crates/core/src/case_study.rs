//! Eurostoxx 50 market data and published calibrations used as fixtures.
//!
//! Volatilities are in percent, prices in basis points of the 10y forward,
//! exactly as tabulated.

use crate::calibration::{ForwardCurve, VolSurface};
use crate::error::Result;
use crate::heston_cf::PeriodParams;
use crate::tenor::Tenor;
use crate::term_structure::TermStructure;

pub const SPOT: f64 = 3868.64;

pub const TENORS: [Tenor; 10] = [
    Tenor::Months(1),
    Tenor::Months(3),
    Tenor::Months(6),
    Tenor::Months(9),
    Tenor::Years(1),
    Tenor::Years(2),
    Tenor::Years(3),
    Tenor::Years(4),
    Tenor::Years(5),
    Tenor::Years(10),
];

pub const MONEYNESS: [f64; 7] = [0.85, 0.90, 0.95, 1.00, 1.05, 1.10, 1.15];

/// Implied volatilities (percent), rows by moneyness, columns by tenor.
pub const VOLS_PCT: [[f64; 10]; 7] = [
    [23.0, 18.7, 18.5, 18.6, 19.1, 19.7, 20.6, 21.5, 22.2, 25.8],
    [18.9, 16.7, 17.0, 17.2, 17.8, 18.8, 19.8, 20.8, 21.5, 25.3],
    [15.2, 14.7, 15.5, 16.0, 16.6, 17.8, 19.0, 20.0, 20.8, 24.7],
    [12.2, 13.2, 14.1, 14.8, 15.5, 16.9, 18.2, 19.3, 20.2, 24.2],
    [11.6, 12.3, 13.1, 13.9, 14.4, 16.1, 17.5, 18.7, 19.5, 23.7],
    [13.3, 12.3, 12.6, 13.2, 13.7, 15.4, 16.9, 18.1, 19.0, 23.2],
    [15.6, 12.9, 12.4, 12.7, 13.2, 14.8, 16.3, 17.5, 18.5, 22.7],
];

/// Forwards delivered at each tenor; the last is the calibration forward.
pub const FORWARDS: [f64; 10] = [3870.6, 3874.4, 3880.3, 3886.0, 3892.0, 3915.3, 3938.9, 3962.6, 3986.5, 4107.9];

/// Undiscounted option prices on the 10y forward (bp of that forward).
pub const PRICES_BP: [[f64; 10]; 7] = [
    [0.4, 12.8, 60.1, 115.0, 181.0, 412.0, 632.0, 850.0, 1045.0, 1958.0],
    [3.7, 36.8, 115.0, 190.0, 271.0, 537.0, 780.0, 1011.0, 1216.0, 2166.0],
    [25.3, 100.0, 213.0, 308.0, 401.0, 694.0, 953.0, 1194.0, 1405.0, 2384.0],
    [138.0, 255.0, 383.0, 488.0, 584.0, 887.0, 1155.0, 1399.0, 1614.0, 2612.0],
    [11.7, 79.7, 189.0, 295.0, 396.0, 747.0, 1074.0, 1378.0, 1653.0, 2851.0],
    [0.7, 18.5, 72.2, 144.0, 220.0, 532.0, 846.0, 1145.0, 1418.0, 2742.0],
    [0.0, 4.3, 25.5, 63.7, 111.0, 362.0, 652.0, 938.0, 1205.0, 2532.0],
];

/// Market minus model (bp), constrained calibration.
pub const ERRORS_CONSTRAINED_BP: [[f64; 10]; 7] = [
    [1.0, 1.0, -2.0, 0.0, 1.0, -4.0, 0.0, -1.0, -3.0, -4.0],
    [2.0, 1.0, -1.0, -1.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0],
    [-1.0, -1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0],
    [0.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 2.0],
    [0.0, 0.0, 0.0, 0.0, -1.0, -1.0, 0.0, 0.0, -2.0, 1.0],
    [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -2.0],
    [0.0, 0.0, 0.0, -2.0, 4.0, 3.0, -1.0, 1.0, 4.0, -8.0],
];

/// Market minus model (bp), unconstrained calibration.
pub const ERRORS_UNCONSTRAINED_BP: [[f64; 10]; 7] = [
    [1.0, 1.0, -1.0, 1.0, 0.0, -1.0, 2.0, 0.0, -1.0, -3.0],
    [2.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0],
    [0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0],
    [0.0, 0.0, 0.0, 0.0, -1.0, -2.0, 0.0, -1.0, -3.0, 1.0],
    [0.0, -1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, -1.0],
    [0.0, 0.0, -1.0, -2.0, 3.0, 7.0, 2.0, 4.0, 6.0, -7.0],
];

pub const V0_CONSTRAINED: f64 = 0.0174;
pub const V0_UNCONSTRAINED: f64 = 0.0175;

/// Published constrained parameters per period: `(theta, kappa, sigma, rho)`.
pub const PARAMS_CONSTRAINED: [(f64, f64, f64, f64); 10] = [
    (0.01, 0.61, 0.60, -0.42),
    (0.03, 7.33, 0.56, -0.46),
    (0.03, 6.25, 1.13, -0.59),
    (0.03, 6.46, 1.15, -0.63),
    (0.05, 4.20, 1.09, -0.90),
    (0.05, 2.78, 1.26, -0.67),
    (0.07, 1.97, 1.18, -0.75),
    (0.12, 0.84, 1.14, -0.77),
    (0.14, 0.61, 1.12, -0.79),
    (0.31, 0.29, 1.14, -0.84),
];

/// Published unconstrained parameters per period: `(theta, kappa, sigma, rho)`.
pub const PARAMS_UNCONSTRAINED: [(f64, f64, f64, f64); 10] = [
    (0.01, 0.84, 0.61, -0.42),
    (0.03, 4.75, 0.35, -0.57),
    (0.03, 3.08, 0.77, -0.56),
    (0.03, 5.21, 0.83, -0.68),
    (0.05, 4.87, 1.54, -0.77),
    (0.05, 4.82, 1.58, -0.78),
    (0.06, 3.81, 1.88, -0.80),
    (0.09, 3.89, 3.35, -0.85),
    (0.11, 4.51, 5.24, -0.88),
    (0.21, 3.02, 6.70, -0.92),
];

pub fn tenor_years() -> [f64; 10] {
    TENORS.map(|t| t.years())
}

/// The calibration forward (10y).
pub fn base_forward() -> f64 {
    FORWARDS[FORWARDS.len() - 1]
}

fn structure(v0: f64, params: &[(f64, f64, f64, f64); 10]) -> Result<TermStructure> {
    TermStructure::from_pairs(
        v0,
        tenor_years()
            .into_iter()
            .zip(params.iter())
            .map(|(end, &(theta, kappa, sigma, rho))| (end, PeriodParams { kappa, theta, sigma, rho, mu: 0.0 })),
    )
}

/// Published constrained term structure (driftless, on the 10y forward).
pub fn constrained_structure() -> TermStructure {
    structure(V0_CONSTRAINED, &PARAMS_CONSTRAINED).expect("published parameters are valid")
}

/// Published unconstrained term structure (driftless, on the 10y forward).
pub fn unconstrained_structure() -> TermStructure {
    structure(V0_UNCONSTRAINED, &PARAMS_UNCONSTRAINED).expect("published parameters are valid")
}

/// The implied volatilities as a surface (vols as decimals).
pub fn eurostoxx_surface() -> VolSurface {
    VolSurface::new(
        SPOT,
        tenor_years().to_vec(),
        MONEYNESS.to_vec(),
        VOLS_PCT.iter().map(|r| r.iter().map(|v| v / 100.0).collect()).collect(),
    )
    .expect("tabulated surface is valid")
}

pub fn eurostoxx_forwards() -> ForwardCurve {
    ForwardCurve::new(tenor_years().to_vec(), FORWARDS.to_vec()).expect("tabulated forwards are valid")
}
