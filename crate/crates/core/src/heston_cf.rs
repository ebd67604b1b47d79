//! Single-period Heston characteristic-function coefficients.
//!
//! For constant parameters on a period of length `tau`, the conditional
//! transform of the joint state `(x, v)` at the end of the period is
//!
//! ```text
//! E[exp(C0 + D0 v_T + i X x_T) | x_t, v_t] = exp(C + D v_t + i X x_t)
//! ```
//!
//! where `(C, D)` solve the Riccati system
//!
//! ```text
//! dD/dtau = 1/2 sigma^2 D^2 - (kappa - i rho sigma X) D - 1/2 X (X + i)
//! dC/dtau = i mu X + kappa theta D
//! ```
//!
//! with `C(0) = C0`, `D(0) = D0`. The closed form below uses the branch whose
//! exponential `exp(-d tau)` decays (`Re d >= 0`), so the complex logarithm
//! never crosses its branch cut as `tau` grows.
//!
//! The formulas are rearranged so that nothing is divided by `sigma^2` before
//! the cancellation `b - d` has been removed analytically; this keeps the
//! small-vol-of-variance limit accurate to machine precision.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Smallest accepted volatility of variance.
pub const MIN_SIGMA: f64 = 1e-8;

/// `|1 - g~ exp(-d tau)|` below this is reported as a singularity.
const SINGULAR_DENOMINATOR: f64 = 1e-13;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Heston parameters for one period of constant dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodParams {
    /// Mean-reversion speed of the variance.
    pub kappa: f64,
    /// Long-run variance.
    pub theta: f64,
    /// Volatility of variance.
    pub sigma: f64,
    /// Correlation between the asset and variance drivers.
    pub rho: f64,
    /// Risk-neutral drift of the log-asset (`r - q`).
    pub mu: f64,
}

impl PeriodParams {
    pub fn new(kappa: f64, theta: f64, sigma: f64, rho: f64, mu: f64) -> Result<Self> {
        let p = Self {
            kappa,
            theta,
            sigma,
            rho,
            mu,
        };
        p.validate()?;
        Ok(p)
    }

    /// Driftless parameters, the forward-measure case.
    pub fn driftless(kappa: f64, theta: f64, sigma: f64, rho: f64) -> Result<Self> {
        Self::new(kappa, theta, sigma, rho, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.kappa, self.theta, self.sigma, self.rho, self.mu]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter(format!("non-finite parameter in {self:?}")));
        }
        if self.kappa < 0.0 {
            return Err(Error::InvalidParameter(format!("kappa = {} < 0", self.kappa)));
        }
        if self.theta < 0.0 {
            return Err(Error::InvalidParameter(format!("theta = {} < 0", self.theta)));
        }
        if self.sigma < MIN_SIGMA {
            return Err(Error::InvalidParameter(format!(
                "sigma = {} below {MIN_SIGMA:e}",
                self.sigma
            )));
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidParameter(format!("rho = {} outside [-1, 1]", self.rho)));
        }
        Ok(())
    }

    /// `2 kappa theta > sigma^2`: the variance cannot reach zero.
    pub fn feller_satisfied(&self) -> bool {
        2.0 * self.kappa * self.theta > self.sigma * self.sigma
    }
}

/// Affine exponent `c + d2 v + d1 x` of a characteristic function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfCoeffs {
    pub c: Complex64,
    /// Coefficient of the variance.
    pub d2: Complex64,
    /// Coefficient of the log-asset; always `i X` for Heston.
    pub d1: Complex64,
}

impl CfCoeffs {
    pub fn zero() -> Self {
        Self {
            c: Complex64::new(0.0, 0.0),
            d2: Complex64::new(0.0, 0.0),
            d1: Complex64::new(0.0, 0.0),
        }
    }

    /// The exponent `c + d2 v0 + d1 x0`.
    pub fn exponent(&self, x0: f64, v0: f64) -> Complex64 {
        self.c + self.d2 * v0 + self.d1 * x0
    }

    pub fn evaluate(&self, x0: f64, v0: f64) -> Complex64 {
        self.exponent(x0, v0).exp()
    }

    pub fn conj(&self) -> Self {
        Self {
            c: self.c.conj(),
            d2: self.d2.conj(),
            d1: self.d1.conj(),
        }
    }
}

/// `exp(c + d2 v0 + d1 x0)`.
pub fn evaluate_cf(coeffs: &CfCoeffs, x0: f64, v0: f64) -> Complex64 {
    coeffs.evaluate(x0, v0)
}

/// Coefficients of the Riccati equation and the quantities of its closed-form
/// solution that depend only on the transform argument and the initial
/// variance coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiTerms {
    /// Quadratic coefficient, `-sigma^2 / 2`.
    pub a: Complex64,
    /// Linear coefficient, `kappa - i rho sigma X`.
    pub b: Complex64,
    /// Constant term, `X (X + i) / 2`.
    pub m: Complex64,
    /// Principal root of `b^2 + sigma^2 X (X + i)`.
    pub d: Complex64,
    pub g: Complex64,
    pub g_tilde: Complex64,
}

/// Intermediate quantities in the cancellation-free form.
struct Core {
    b: Complex64,
    d: Complex64,
    /// `b + d`
    bpd: Complex64,
    /// `(b - d) / sigma^2`
    bmd_s2: Complex64,
}

fn core_terms(x: Complex64, p: &PeriodParams) -> Core {
    let s2 = p.sigma * p.sigma;
    let b = p.kappa - I * (p.rho * p.sigma) * x;
    let xx = x * (x + I);
    let d = (b * b + s2 * xx).sqrt();
    // (b + d)(b - d) = -sigma^2 X (X + i); compute whichever factor has no
    // cancellation directly and recover the other from the product.
    let (bpd, bmd_s2) = if b.re >= 0.0 {
        let bpd = b + d;
        let bmd_s2 = if bpd.norm() > 0.0 { -xx / bpd } else { (b - d) / s2 };
        (bpd, bmd_s2)
    } else {
        let bmd = b - d;
        let bpd = if bmd.norm() > 0.0 { -s2 * xx / bmd } else { b + d };
        (bpd, bmd / s2)
    };
    Core { b, d, bpd, bmd_s2 }
}

/// Riccati coefficients and `(d, g, g~)` for transform argument `x_arg` and
/// initial variance coefficient `d0`.
pub fn riccati_terms(x_arg: Complex64, d0: Complex64, params: &PeriodParams) -> RiccatiTerms {
    let s2 = params.sigma * params.sigma;
    let core = core_terms(x_arg, params);
    let g = core.bmd_s2 * s2 / core.bpd;
    let g_tilde = (core.bmd_s2 - d0) * s2 / (core.bpd - d0 * s2);
    RiccatiTerms {
        a: Complex64::new(-0.5 * s2, 0.0),
        b: core.b,
        m: 0.5 * x_arg * (x_arg + I),
        d: core.d,
        g,
        g_tilde,
    }
}

/// `exp(z) - 1` without cancellation for small `z`.
fn expm1(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    Complex64::new(z.re.exp_m1() * c - 2.0 * half * half, z.re.exp() * s)
}

/// Principal `ln(1 + z)` without cancellation for small `z`.
fn ln1p(z: Complex64) -> Complex64 {
    let re = 0.5 * (2.0 * z.re + z.norm_sqr()).ln_1p();
    let im = z.im.atan2(1.0 + z.re);
    Complex64::new(re, im)
}

/// `(1 - exp(-d tau)) / d`, continuous through `d = 0`.
fn decay_integral(d: Complex64, tau: f64) -> Complex64 {
    let dt = d * tau;
    if dt.norm() < 1e-5 {
        tau * (1.0 - dt / 2.0 + dt * dt / 6.0)
    } else {
        -expm1(-dt) / d
    }
}

/// Closed-form `(C, D)` after a period of length `tau` starting from the
/// terminal condition `(c0, d0)`.
pub fn period_coeffs(
    tau: f64,
    x_arg: Complex64,
    c0: Complex64,
    d0: Complex64,
    params: &PeriodParams,
) -> Result<CfCoeffs> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::InvalidParameter(format!("period length {tau} must be finite and >= 0")));
    }
    params.validate()?;
    let d1 = I * x_arg;
    if tau == 0.0 {
        return Ok(CfCoeffs { c: c0, d2: d0, d1 });
    }

    let s2 = params.sigma * params.sigma;
    let Core { d, bpd, bmd_s2, .. } = core_terms(x_arg, params);

    let q = bmd_s2 - d0; // (b - d - D0 sigma^2) / sigma^2
    let e = (-d * tau).exp();
    let one_minus_e_over_d = decay_integral(d, tau);
    let one_minus_e = d * one_minus_e_over_d;

    // (b + d - D0 sigma^2) (1 - g~ e^{-d tau})
    let g_den = bpd - d0 * s2;
    let denom = g_den - s2 * q * e;
    if g_den.norm() > 0.0 && (denom / g_den).norm() < SINGULAR_DENOMINATOR {
        return Err(Error::NumericalSingularity("1 - g~ exp(-d tau)"));
    }
    if denom.norm() == 0.0 {
        return Err(Error::NumericalSingularity("1 - g~ exp(-d tau)"));
    }

    let d2 = (2.0 * d0 * d + bpd * q * one_minus_e) / denom;

    // (1 - g~ e^{-d tau}) / (1 - g~) = 1 + z
    let z = s2 * q * one_minus_e_over_d / 2.0;
    if (1.0 + z).norm() == 0.0 {
        return Err(Error::NumericalSingularity("log argument"));
    }
    let log_over_s2 = if z.norm() == 0.0 { Complex64::new(0.0, 0.0) } else { ln1p(z) / s2 };

    let c = I * (params.mu * tau) * x_arg
        + params.kappa * params.theta * (-2.0 * log_over_s2 + bmd_s2 * tau)
        + c0;

    if !(c.re.is_finite() && c.im.is_finite() && d2.re.is_finite() && d2.im.is_finite()) {
        return Err(Error::NumericalSingularity("non-finite coefficients"));
    }
    Ok(CfCoeffs { c, d2, d1 })
}
