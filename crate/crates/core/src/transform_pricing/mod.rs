//! Fourier inversion of characteristic functions into exercise probabilities
//! and vanilla prices.
//!
//! For a log-price `x` with characteristic function `phi`,
//!
//! ```text
//! P(x > a) = 1/2 + 1/pi int_0^inf Re(phi(X) e^{-iXa} / (iX)) dX
//! ```
//!
//! and the share-measure probability uses the tilted transform
//! `phi(X - i) / phi(-i)`. A call is then
//! `discount * (F * P~(x_T > ln K) - K * P(x_T > ln K))` with `F = phi(-i)`.

mod black;
mod quadrature;

use num_complex::Complex64;

pub use black::{black_scholes_price, implied_vol, norm_cdf, MAX_IMPLIED_VOL};
pub use quadrature::{integrate_half_line, GaussLegendre, InversionConfig};

use crate::error::{Error, Result};
use crate::heston_cf::CfCoeffs;
use crate::term_structure::TermStructure;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const MINUS_I: Complex64 = Complex64 { re: 0.0, im: -1.0 };

/// `|phi(-i)|` below this cannot normalize the tilted transform.
const MIN_NORMALIZER: f64 = 1e-300;

fn check_normalized(phi0: Complex64) {
    debug_assert!(
        (phi0 - 1.0).norm() <= 1e-9,
        "characteristic function at 0 is {phi0}, expected 1"
    );
}

/// `P(x > a)` from the characteristic function of `x` on the real line.
pub fn tail_probability(cf: impl Fn(f64) -> Complex64, a: f64, cfg: &InversionConfig) -> Result<f64> {
    check_normalized(cf(0.0));
    let integral = integrate_half_line(1, cfg.abs_tol * std::f64::consts::PI, cfg, |x, out| {
        let psi = cf(x) * Complex64::from_polar(1.0, -x * a);
        out[0] = psi.im / x;
    })?;
    Ok((0.5 + integral[0] / std::f64::consts::PI).clamp(0.0, 1.0))
}

/// Share-measure probability `P~(x > a)` from a characteristic function
/// that accepts complex arguments.
pub fn tilted_tail_probability(cf: impl Fn(Complex64) -> Complex64, a: f64, cfg: &InversionConfig) -> Result<f64> {
    let norm = cf(MINUS_I);
    if !(norm.norm() >= MIN_NORMALIZER) || !norm.re.is_finite() {
        return Err(Error::DegenerateForward(norm.norm()));
    }
    tail_probability(|x| cf(Complex64::new(x, -1.0)) / norm, a, cfg)
}

/// A European option on the underlying.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VanillaSpec {
    pub strike: f64,
    pub maturity: f64,
    pub is_call: bool,
    /// Discount factor to the maturity.
    pub discount: f64,
}

impl VanillaSpec {
    /// Undiscounted option, the forward-measure convention.
    pub fn undiscounted(strike: f64, maturity: f64, is_call: bool) -> Self {
        Self {
            strike,
            maturity,
            is_call,
            discount: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.strike > 0.0) || !self.strike.is_finite() {
            return Err(Error::InvalidParameter(format!("strike {} must be > 0", self.strike)));
        }
        if !(self.maturity > 0.0) {
            return Err(Error::InvalidParameter(format!("maturity {} must be > 0", self.maturity)));
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err(Error::InvalidParameter(format!("discount {} must lie in (0, 1]", self.discount)));
        }
        Ok(())
    }
}

/// Exercise probabilities of a batch of strikes at one maturity.
#[derive(Debug, Clone, PartialEq)]
pub struct StrikeProbabilities {
    /// `E[S_T] = phi(-i)`.
    pub forward: f64,
    /// Share-measure probabilities `P~(x_T > ln K)`.
    pub tilted: Vec<f64>,
    /// `P(x_T > ln K)`.
    pub plain: Vec<f64>,
}

/// A characteristic function given as `exp(exponent(X) + i X x0)`, where the
/// exponent does not depend on the starting log-level.
pub trait LogReturnTransform: Sync {
    /// `ln E[exp(i X (x_T - x0))]` for complex `X`.
    fn log_cf(&self, x_arg: Complex64) -> Result<Complex64>;
}

/// Marginal log-return transform of a term structure at a fixed maturity.
pub struct MarginalTransform<'a> {
    pub ts: &'a TermStructure,
    pub maturity: f64,
    pub v0: f64,
}

impl LogReturnTransform for MarginalTransform<'_> {
    fn log_cf(&self, x_arg: Complex64) -> Result<Complex64> {
        let k: CfCoeffs = self.ts.compose(0.0, self.maturity, x_arg, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))?;
        Ok(k.c + k.d2 * self.v0)
    }
}

/// Inverts `P~` and `P` for every strike on a shared node set.
///
/// `x0` is the starting log-level; strikes are absolute.
pub fn strike_probabilities(
    transform: &dyn LogReturnTransform,
    x0: f64,
    strikes: &[f64],
    cfg: &InversionConfig,
) -> Result<StrikeProbabilities> {
    if let Some(k) = strikes.iter().find(|k| !(**k > 0.0)) {
        return Err(Error::InvalidParameter(format!("strike {k} must be > 0")));
    }
    let log_fwd = transform.log_cf(MINUS_I)?;
    if !log_fwd.re.is_finite() || log_fwd.re < MIN_NORMALIZER.ln() {
        return Err(Error::DegenerateForward(log_fwd.re.exp()));
    }
    let forward = (log_fwd.re + x0).exp();
    let moneyness: Vec<f64> = strikes.iter().map(|k| x0 - k.ln()).collect();
    let n = strikes.len();

    let mut failure: Option<Error> = None;
    let integral = integrate_half_line(2 * n, cfg.abs_tol * std::f64::consts::PI, cfg, |x, out| {
        let plain = transform.log_cf(Complex64::new(x, 0.0));
        let tilted = transform.log_cf(Complex64::new(x, -1.0));
        let (plain, tilted) = match (plain, tilted) {
            (Ok(p), Ok(t)) => (p, t - log_fwd),
            (Err(e), _) | (_, Err(e)) => {
                failure.get_or_insert(e);
                out.iter_mut().for_each(|v| *v = 0.0);
                return;
            }
        };
        for (j, m) in moneyness.iter().enumerate() {
            let phase = I * (x * m);
            out[j] = (tilted + phase).exp().im / x;
            out[n + j] = (plain + phase).exp().im / x;
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let prob = |v: f64| (0.5 + v / std::f64::consts::PI).clamp(0.0, 1.0);
    Ok(StrikeProbabilities {
        forward,
        tilted: integral[..n].iter().map(|v| prob(*v)).collect(),
        plain: integral[n..].iter().map(|v| prob(*v)).collect(),
    })
}

/// Call and put from the two probabilities; puts by parity.
pub(crate) fn price_from_probabilities(
    forward: f64,
    strike: f64,
    p_tilde: f64,
    p: f64,
    discount: f64,
    is_call: bool,
    abs_tol: f64,
) -> f64 {
    let mut call = discount * (forward * p_tilde - strike * p);
    if call < 0.0 {
        if call < -abs_tol * strike.max(forward) {
            log::warn!("negative call price {call} from quadrature noise clamped to 0");
        }
        call = 0.0;
    }
    if is_call {
        call
    } else {
        (call - discount * (forward - strike)).max(0.0)
    }
}

/// Prices of several options sharing a maturity and discount factor.
pub fn vanilla_prices(
    ts: &TermStructure,
    maturity: f64,
    discount: f64,
    options: &[(f64, bool)],
    x0: f64,
    cfg: &InversionConfig,
) -> Result<Vec<f64>> {
    for &(strike, is_call) in options {
        VanillaSpec { strike, maturity, is_call, discount }.validate()?;
    }
    ts.check_horizon(maturity)?;
    let transform = MarginalTransform {
        ts,
        maturity,
        v0: ts.v0(),
    };
    let strikes: Vec<f64> = options.iter().map(|o| o.0).collect();
    let probs = strike_probabilities(&transform, x0, &strikes, cfg)?;
    Ok(options
        .iter()
        .enumerate()
        .map(|(j, &(strike, is_call))| {
            price_from_probabilities(
                probs.forward,
                strike,
                probs.tilted[j],
                probs.plain[j],
                discount,
                is_call,
                cfg.abs_tol,
            )
        })
        .collect())
}

/// Price of a vanilla option under the term structure, starting from
/// log-spot `x0` and the structure's initial variance.
pub fn vanilla_price(ts: &TermStructure, spec: &VanillaSpec, x0: f64, cfg: &InversionConfig) -> Result<f64> {
    spec.validate()?;
    Ok(vanilla_prices(ts, spec.maturity, spec.discount, &[(spec.strike, spec.is_call)], x0, cfg)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heston_cf::PeriodParams;
    use crate::term_structure::marginal_cf;

    fn normal_cf(x: f64) -> Complex64 {
        Complex64::new((-0.5 * x * x).exp(), 0.0)
    }

    #[test]
    fn symmetric_distribution_has_half_mass_above_mean() {
        let p = tail_probability(normal_cf, 0.0, &InversionConfig::default()).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn normal_quantile() {
        let cfg = InversionConfig::default();
        let a = -1.6448536269514722;
        let p = tail_probability(normal_cf, a, &cfg).unwrap();
        let exact = 1.0 - norm_cdf(a);
        assert!((p - exact).abs() <= cfg.abs_tol, "{p} vs {exact}");
        assert!((p - 0.95).abs() < 1e-9);
    }

    #[test]
    fn point_mass() {
        let x0 = 1.3;
        let cf = |x: f64| Complex64::from_polar(1.0, x * x0);
        let cfg = InversionConfig::default();
        let above = tail_probability(cf, x0 - 0.5, &cfg).unwrap();
        let below = tail_probability(cf, x0 + 0.5, &cfg).unwrap();
        assert!(above > 1.0 - 1e-5, "{above}");
        assert!(below < 1e-5, "{below}");
        // tilting a point mass changes nothing
        let ccf = |x: Complex64| (I * x * x0).exp();
        let tilted = tilted_tail_probability(ccf, x0 - 0.5, &cfg).unwrap();
        assert!(tilted > 1.0 - 1e-5);
    }

    #[test]
    fn tilted_normal_is_delta_probability() {
        // x ~ N(m, s^2) with m = ln F - s^2/2; P~(x > ln K) = N(d1)
        let (f, k, s) = (1.05f64, 1.0f64, 0.3f64);
        let m = f.ln() - 0.5 * s * s;
        let cf = |x: Complex64| (I * x * m - 0.5 * s * s * x * x).exp();
        let cfg = InversionConfig::default();
        let pt = tilted_tail_probability(cf, k.ln(), &cfg).unwrap();
        let d1 = (f / k).ln() / s + 0.5 * s;
        assert!((pt - norm_cdf(d1)).abs() <= cfg.abs_tol, "{pt} vs {}", norm_cdf(d1));
    }

    #[test]
    fn vanishing_normalizer_is_an_error() {
        let cf = |_x: Complex64| Complex64::new(0.0, 0.0);
        assert!(matches!(
            tilted_tail_probability(cf, 0.0, &InversionConfig::default()),
            Err(Error::DegenerateForward(_))
        ));
    }

    fn heston() -> TermStructure {
        TermStructure::flat(0.04, 1.0, PeriodParams::driftless(2.0, 0.04, 0.5, -0.7).unwrap()).unwrap()
    }

    #[test]
    fn batch_matches_scalar_inversion() {
        let ts = heston();
        let x0 = 100f64.ln();
        let cfg = InversionConfig::default();
        let k: f64 = 95.0;
        let plain = tail_probability(
            |x| marginal_cf(&ts, 1.0, Complex64::new(x, 0.0), x0, None).unwrap(),
            k.ln(),
            &cfg,
        )
        .unwrap();
        let tilted =
            tilted_tail_probability(|x| marginal_cf(&ts, 1.0, x, x0, None).unwrap(), k.ln(), &cfg).unwrap();
        let tr = MarginalTransform { ts: &ts, maturity: 1.0, v0: ts.v0() };
        let batch = strike_probabilities(&tr, x0, &[k], &cfg).unwrap();
        assert!((batch.plain[0] - plain).abs() < 2.0 * cfg.abs_tol);
        assert!((batch.tilted[0] - tilted).abs() < 2.0 * cfg.abs_tol);
        assert!((batch.forward - 100.0).abs() < 1e-10);
    }

    #[test]
    fn parity_and_bounds() {
        let ts = heston();
        let x0 = 100f64.ln();
        let cfg = InversionConfig::default();
        for k in [60.0, 90.0, 100.0, 125.0, 180.0] {
            let call = vanilla_price(&ts, &VanillaSpec { strike: k, maturity: 1.0, is_call: true, discount: 0.9 }, x0, &cfg)
                .unwrap();
            let put = vanilla_price(&ts, &VanillaSpec { strike: k, maturity: 1.0, is_call: false, discount: 0.9 }, x0, &cfg)
                .unwrap();
            assert!((call - put - 0.9 * (100.0 - k)).abs() <= 1e-9 * call.max(1.0));
            assert!(call >= 0.9 * (100.0f64 - k).max(0.0) - 1e-9);
            assert!(call <= 0.9 * 100.0);
        }
    }

    #[test]
    fn tiny_strike_call_is_discounted_forward() {
        let ts = heston();
        let price = vanilla_price(
            &ts,
            &VanillaSpec { strike: 1e-6, maturity: 0.5, is_call: true, discount: 0.95 },
            50f64.ln(),
            &InversionConfig::default(),
        )
        .unwrap();
        assert!((price - 0.95 * 50.0).abs() < 1e-6, "{price}");
    }

    #[test]
    fn rejects_bad_specs() {
        let ts = heston();
        let cfg = InversionConfig::default();
        let spec = VanillaSpec { strike: -1.0, maturity: 1.0, is_call: true, discount: 1.0 };
        assert!(vanilla_price(&ts, &spec, 0.0, &cfg).is_err());
        let spec = VanillaSpec { strike: 1.0, maturity: 2.0, is_call: true, discount: 1.0 };
        assert!(matches!(vanilla_price(&ts, &spec, 0.0, &cfg), Err(Error::OutOfHorizon { .. })));
        let spec = VanillaSpec { strike: 1.0, maturity: 1.0, is_call: true, discount: 1.5 };
        assert!(vanilla_price(&ts, &spec, 0.0, &cfg).is_err());
    }
}
