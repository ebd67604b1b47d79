//! Piecewise-constant parameter term structures and characteristic-function
//! composition across periods.
//!
//! If the period `[t_u, t_v]` has exponent `C_uv(X, V) + D_uv(X, V) v_u + i X x_u`
//! then conditioning on the state at `t_u` gives
//!
//! ```text
//! C_0v(X, V) = C_uv(X, V) + C_0u(X, -i D_uv(X, V))
//! D_0v(X, V) = D_0u(X, -i D_uv(X, V))
//! ```
//!
//! Feeding `D_uv` back as the variance argument of the earlier period is the
//! same as using it as the terminal condition `D0` of the earlier period's
//! Riccati solution, and the accumulated `C_uv` plays the role of `C0`. The
//! recursion therefore walks the periods backwards in time, threading
//! `(C, D)` through [`period_coeffs`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::heston_cf::{period_coeffs, CfCoeffs, PeriodParams};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Slack allowed when comparing a maturity against the last period end.
const HORIZON_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Period {
    /// End of the period in years; the start is the previous period's end.
    pub end: f64,
    pub params: PeriodParams,
}

/// Initial variance plus consecutive periods starting at time zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TermStructure {
    v0: f64,
    periods: Vec<Period>,
}

impl TermStructure {
    pub fn new(v0: f64, periods: Vec<Period>) -> Result<Self> {
        if !(v0 >= 0.0) || !v0.is_finite() {
            return Err(Error::InvalidParameter(format!("v0 = {v0} must be finite and >= 0")));
        }
        if periods.is_empty() {
            return Err(Error::InvalidParameter("term structure needs at least one period".into()));
        }
        let mut prev = 0.0;
        for p in &periods {
            if !(p.end > prev) || !p.end.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "period ends must be strictly increasing from 0 (got {} after {prev})",
                    p.end
                )));
            }
            p.params.validate()?;
            prev = p.end;
        }
        Ok(Self { v0, periods })
    }

    /// A single period of constant parameters up to `horizon`.
    pub fn flat(v0: f64, horizon: f64, params: PeriodParams) -> Result<Self> {
        Self::new(v0, vec![Period { end: horizon, params }])
    }

    /// Builds from `(end, params)` pairs.
    pub fn from_pairs(v0: f64, pairs: impl IntoIterator<Item = (f64, PeriodParams)>) -> Result<Self> {
        Self::new(v0, pairs.into_iter().map(|(end, params)| Period { end, params }).collect())
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    pub fn periods(&self) -> &[Period] {
        &self.periods
    }

    pub fn horizon(&self) -> f64 {
        self.periods.last().map(|p| p.end).unwrap_or(0.0)
    }

    pub fn with_v0(&self, v0: f64) -> Result<Self> {
        Self::new(v0, self.periods.clone())
    }

    /// Appends a period ending at `end`.
    pub fn push(&mut self, end: f64, params: PeriodParams) -> Result<()> {
        if !(end > self.horizon()) {
            return Err(Error::InvalidParameter(format!(
                "period end {end} must exceed horizon {}",
                self.horizon()
            )));
        }
        params.validate()?;
        self.periods.push(Period { end, params });
        Ok(())
    }

    /// Inserts an artificial boundary at `t` without changing the dynamics.
    pub fn split_at(&self, t: f64) -> Result<Self> {
        self.check_horizon(t)?;
        let mut periods = Vec::with_capacity(self.periods.len() + 1);
        let mut start = 0.0;
        for p in &self.periods {
            if t > start && t < p.end {
                periods.push(Period { end: t, params: p.params });
            }
            periods.push(*p);
            start = p.end;
        }
        Self::new(self.v0, periods)
    }

    /// Extends the last period's parameters out to `t` (no-op if already covered).
    pub fn extended_to(&self, t: f64) -> Self {
        let mut out = self.clone();
        if t > out.horizon() {
            if let Some(last) = out.periods.last_mut() {
                last.end = t;
            }
        }
        out
    }

    /// Parameters in force at time `t` (right-continuous at boundaries).
    pub fn params_at(&self, t: f64) -> Option<&PeriodParams> {
        self.periods.iter().find(|p| t < p.end).map(|p| &p.params)
    }

    /// Period start times, parallel to [`periods`](Self::periods).
    pub fn starts(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(0.0).chain(self.periods.iter().map(|p| p.end)).take(self.periods.len())
    }

    /// Maps `t` onto the horizon, rejecting maturities beyond it.
    pub(crate) fn check_horizon(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!("time {t} must be finite and >= 0")));
        }
        let h = self.horizon();
        if t > h + HORIZON_SLACK {
            return Err(Error::OutOfHorizon { t, horizon: h });
        }
        Ok(t.min(h))
    }

    /// Composes the exponent over `[start, end]` starting from the terminal
    /// condition `(c0, d0)` at `end`, walking periods from latest to earliest.
    pub fn compose(
        &self,
        start: f64,
        end: f64,
        x_arg: Complex64,
        c0: Complex64,
        d0: Complex64,
    ) -> Result<CfCoeffs> {
        let end = self.check_horizon(end)?;
        if !(start >= 0.0) || start > end {
            return Err(Error::InvalidParameter(format!("window [{start}, {end}] is empty or negative")));
        }
        let mut acc = CfCoeffs { c: c0, d2: d0, d1: I * x_arg };
        for (period_start, period) in self.starts().zip(&self.periods).collect::<Vec<_>>().into_iter().rev() {
            let lo = period_start.max(start);
            let hi = period.end.min(end);
            if hi <= lo {
                continue;
            }
            acc = period_coeffs(hi - lo, x_arg, acc.c, acc.d2, &period.params)?;
        }
        Ok(acc)
    }
}

/// Joint-transform coefficients from 0 to `t` at arguments `(X, V)`.
pub fn cf_coeffs_to(ts: &TermStructure, t: f64, x_arg: Complex64, v_arg: Complex64) -> Result<CfCoeffs> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("maturity {t} must be > 0")));
    }
    ts.compose(0.0, t, x_arg, Complex64::new(0.0, 0.0), I * v_arg)
}

/// Characteristic function of the log-asset at `t`, `E[exp(i X x_t)]`.
pub fn marginal_cf(
    ts: &TermStructure,
    t: f64,
    x_arg: Complex64,
    x0: f64,
    v0_override: Option<f64>,
) -> Result<Complex64> {
    let coeffs = cf_coeffs_to(ts, t, x_arg, Complex64::new(0.0, 0.0))?;
    Ok(coeffs.evaluate(x0, v0_override.unwrap_or(ts.v0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heston_cf::period_coeffs;

    fn p(kappa: f64, theta: f64, sigma: f64, rho: f64) -> PeriodParams {
        PeriodParams::driftless(kappa, theta, sigma, rho).unwrap()
    }

    fn zero() -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    fn close(a: &CfCoeffs, b: &CfCoeffs, tol: f64) -> bool {
        (a.c - b.c).norm() <= tol && (a.d2 - b.d2).norm() <= tol && (a.d1 - b.d1).norm() <= tol
    }

    #[test]
    fn validates_construction() {
        let q = p(1.0, 0.04, 0.3, -0.5);
        assert!(TermStructure::new(0.04, vec![]).is_err());
        assert!(TermStructure::from_pairs(-0.1, [(1.0, q)]).is_err());
        assert!(TermStructure::from_pairs(0.04, [(1.0, q), (1.0, q)]).is_err());
        assert!(TermStructure::from_pairs(0.04, [(0.0, q)]).is_err());
        let mut ts = TermStructure::from_pairs(0.04, [(1.0, q)]).unwrap();
        assert!(ts.push(0.5, q).is_err());
        ts.push(2.0, q).unwrap();
        assert_eq!(ts.horizon(), 2.0);
        assert_eq!(ts.starts().collect::<Vec<_>>(), vec![0.0, 1.0]);
    }

    #[test]
    fn single_period_matches_period_coeffs() {
        let q = p(2.0, 0.04, 0.5, -0.7);
        let ts = TermStructure::flat(0.04, 1.5, q).unwrap();
        let x = Complex64::new(0.8, 0.0);
        let a = cf_coeffs_to(&ts, 1.5, x, zero()).unwrap();
        let b = period_coeffs(1.5, x, zero(), zero(), &q).unwrap();
        assert_eq!(a, b);
        // interior maturity truncates the period
        let a = cf_coeffs_to(&ts, 0.4, x, zero()).unwrap();
        let b = period_coeffs(0.4, x, zero(), zero(), &q).unwrap();
        assert!(close(&a, &b, 1e-15));
    }

    #[test]
    fn identical_halves_compose_to_whole() {
        let q = p(1.3, 0.06, 0.8, -0.6);
        let whole = TermStructure::flat(0.05, 2.0, q).unwrap();
        let halves = TermStructure::from_pairs(0.05, [(1.0, q), (2.0, q)]).unwrap();
        for x in [0.5, -3.0, 17.0] {
            let x = Complex64::new(x, 0.0);
            let a = cf_coeffs_to(&whole, 2.0, x, zero()).unwrap();
            let b = cf_coeffs_to(&halves, 2.0, x, zero()).unwrap();
            assert!(close(&a, &b, 1e-10), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn rejects_maturity_beyond_horizon() {
        let ts = TermStructure::flat(0.04, 1.0, p(1.0, 0.04, 0.3, 0.0)).unwrap();
        let err = cf_coeffs_to(&ts, 1.5, Complex64::new(1.0, 0.0), zero()).unwrap_err();
        assert!(matches!(err, Error::OutOfHorizon { .. }));
        assert!(cf_coeffs_to(&ts.extended_to(1.5), 1.5, Complex64::new(1.0, 0.0), zero()).is_ok());
    }

    #[test]
    fn marginal_normalization_and_martingale() {
        let ts = TermStructure::from_pairs(
            0.0174,
            [(0.25, p(0.61, 0.01, 0.6, -0.42)), (1.0, p(4.2, 0.05, 1.09, -0.9)), (10.0, p(0.29, 0.31, 1.14, -0.84))],
        )
        .unwrap();
        let x0 = 4107.9f64.ln();
        for t in [0.1, 0.25, 1.0, 3.0, 10.0] {
            let one = marginal_cf(&ts, t, zero(), x0, None).unwrap();
            assert!((one - 1.0).norm() < 1e-14);
            let fwd = marginal_cf(&ts, t, Complex64::new(0.0, -1.0), x0, None).unwrap();
            assert!((fwd / x0.exp() - 1.0).norm() < 1e-12, "t={t}: {fwd}");
        }
    }

    #[test]
    fn split_preserves_coefficients() {
        let ts = TermStructure::from_pairs(0.03, [(0.5, p(3.0, 0.02, 0.4, -0.3)), (2.0, p(0.7, 0.1, 1.1, -0.8))])
            .unwrap();
        let split = ts.split_at(1.3).unwrap();
        assert_eq!(split.periods().len(), 3);
        let x = Complex64::new(2.5, 0.0);
        let v = Complex64::new(0.4, 0.0);
        let a = cf_coeffs_to(&ts, 2.0, x, v).unwrap();
        let b = cf_coeffs_to(&split, 2.0, x, v).unwrap();
        assert!(close(&a, &b, 1e-10));
        // splitting at an existing boundary is a no-op
        assert_eq!(ts.split_at(0.5).unwrap(), ts);
    }
}
