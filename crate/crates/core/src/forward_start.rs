//! Forward-start options and forward-skew surfaces.
//!
//! A forward-start call pays `(S_v - K S_u)^+` at `t_v`, its strike fixed at
//! `t_u`. Conditioning on the state at `t_u` and changing to the measure with
//! density `S_u / F_u` turns it into a spot option on the return
//! `x~ = x_v - x_u`, whose transform is
//!
//! ```text
//! phi~(X) = exp(C_uv(X) + C_0u(-i, -i D_uv(X)) + D_0u(-i, -i D_uv(X)) v0 + x0) / F_u
//! ```
//!
//! The `(-i, -i D_uv)` evaluation of the first leg is the composition over
//! `[0, t_u]` with log-asset argument `-i` and terminal condition
//! `(C_uv, D_uv)`, so it reuses the ordinary backward recursion.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::term_structure::TermStructure;
use crate::transform_pricing::{
    implied_vol, price_from_probabilities, strike_probabilities, InversionConfig, LogReturnTransform,
};

const MINUS_I: Complex64 = Complex64 { re: 0.0, im: -1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Forward-start option paying `(S_v - K S_u)^+` (call) or `(K S_u - S_v)^+` (put).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForwardStartSpec {
    pub strike_ratio: f64,
    pub fix_time: f64,
    pub expiry: f64,
    pub discount: f64,
    pub is_call: bool,
}

impl ForwardStartSpec {
    pub fn call(strike_ratio: f64, fix_time: f64, expiry: f64) -> Self {
        Self {
            strike_ratio,
            fix_time,
            expiry,
            discount: 1.0,
            is_call: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.strike_ratio > 0.0) {
            return Err(Error::InvalidParameter(format!("strike ratio {} must be > 0", self.strike_ratio)));
        }
        if !(self.fix_time >= 0.0 && self.fix_time < self.expiry) {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= fix time < expiry (got {} and {})",
                self.fix_time, self.expiry
            )));
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err(Error::InvalidParameter(format!("discount {} must lie in (0, 1]", self.discount)));
        }
        Ok(())
    }
}

/// Transform of the return between `t_u` and `t_v` under the share measure
/// of `t_u`.
pub struct ForwardStartTransform<'a> {
    ts: &'a TermStructure,
    fix_time: f64,
    expiry: f64,
    v0: f64,
    /// `ln F_u - x0`.
    log_fwd_u: f64,
}

impl<'a> ForwardStartTransform<'a> {
    pub fn new(ts: &'a TermStructure, fix_time: f64, expiry: f64) -> Result<Self> {
        if !(fix_time >= 0.0 && fix_time < expiry) {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= fix time < expiry (got {fix_time} and {expiry})"
            )));
        }
        ts.check_horizon(expiry)?;
        let v0 = ts.v0();
        let log_fwd_u = if fix_time == 0.0 {
            0.0
        } else {
            let k = ts.compose(0.0, fix_time, MINUS_I, ZERO, ZERO)?;
            let l = k.c + k.d2 * v0;
            if !l.re.is_finite() {
                return Err(Error::DegenerateForward(0.0));
            }
            l.re
        };
        Ok(Self {
            ts,
            fix_time,
            expiry,
            v0,
            log_fwd_u,
        })
    }

    /// `F_u / e^{x0}`.
    pub fn forward_fix_ratio(&self) -> f64 {
        self.log_fwd_u.exp()
    }

    /// Exponent pieces excluding the normalization: `(C_uv + C_0u, D~)`.
    fn unnormalized(&self, x_arg: Complex64) -> Result<(Complex64, Complex64)> {
        let seg = self.ts.compose(self.fix_time, self.expiry, x_arg, ZERO, ZERO)?;
        if self.fix_time == 0.0 {
            return Ok((seg.c, seg.d2));
        }
        let k = self.ts.compose(0.0, self.fix_time, MINUS_I, seg.c, seg.d2)?;
        Ok((k.c, k.d2))
    }
}

impl LogReturnTransform for ForwardStartTransform<'_> {
    fn log_cf(&self, x_arg: Complex64) -> Result<Complex64> {
        let (c, d) = self.unnormalized(x_arg)?;
        Ok(c + d * self.v0 - self.log_fwd_u)
    }
}

/// `(C~, D~)` with `phi~(X) = exp(C~ + x0 + D~ v0)`.
pub fn forward_start_coeffs(
    ts: &TermStructure,
    fix_time: f64,
    expiry: f64,
    x_arg: Complex64,
    x0: f64,
) -> Result<(Complex64, Complex64)> {
    let tr = ForwardStartTransform::new(ts, fix_time, expiry)?;
    let (c, d) = tr.unnormalized(x_arg)?;
    // ln F_u = log_fwd_u + x0
    Ok((c - tr.log_fwd_u - x0, d))
}

/// Prices of forward-start options sharing fixing and expiry dates, for a
/// batch of `(strike_ratio, is_call)`. Returns `(prices, F_u, F_v / F_u)`.
pub fn forward_start_prices(
    ts: &TermStructure,
    fix_time: f64,
    expiry: f64,
    discount: f64,
    options: &[(f64, bool)],
    x0: f64,
    cfg: &InversionConfig,
) -> Result<(Vec<f64>, f64, f64)> {
    for &(k, is_call) in options {
        ForwardStartSpec {
            strike_ratio: k,
            fix_time,
            expiry,
            discount,
            is_call,
        }
        .validate()?;
    }
    let tr = ForwardStartTransform::new(ts, fix_time, expiry)?;
    let fwd_u = (tr.log_fwd_u + x0).exp();
    let ratios: Vec<f64> = options.iter().map(|o| o.0).collect();
    let probs = strike_probabilities(&tr, 0.0, &ratios, cfg)?;
    let prices = options
        .iter()
        .enumerate()
        .map(|(j, &(k, is_call))| {
            fwd_u
                * price_from_probabilities(probs.forward, k, probs.tilted[j], probs.plain[j], discount, is_call, cfg.abs_tol)
        })
        .collect();
    Ok((prices, fwd_u, probs.forward))
}

/// `discount * E[(S_v - K S_u)^+]` (or the put) from log-spot `x0`.
pub fn forward_start_price(ts: &TermStructure, spec: &ForwardStartSpec, x0: f64, cfg: &InversionConfig) -> Result<f64> {
    spec.validate()?;
    let (p, _, _) = forward_start_prices(
        ts,
        spec.fix_time,
        spec.expiry,
        spec.discount,
        &[(spec.strike_ratio, spec.is_call)],
        x0,
        cfg,
    )?;
    Ok(p[0])
}

/// Implied volatilities of forward-start options of one tenor over a grid of
/// fixing dates and strike ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewSurface {
    pub tenor: f64,
    pub forward_terms: Vec<f64>,
    pub moneyness: Vec<f64>,
    /// `vols[i][j]` for forward term `i` and strike ratio `j`; `None` where
    /// the implied volatility could not be inverted.
    pub vols: Vec<Vec<Option<f64>>>,
    /// Undiscounted prices, same layout, in currency units.
    pub prices: Vec<Vec<f64>>,
}

/// Prices out-of-the-money forward-start options (calls for ratios at or
/// above the forward ratio, puts below) and inverts each through the Black
/// formula with forward `F_v / F_u`, scaled by `F_u`.
pub fn forward_skew(
    ts: &TermStructure,
    tenor: f64,
    forward_terms: &[f64],
    moneyness: &[f64],
    x0: f64,
    cfg: &InversionConfig,
) -> Result<SkewSurface> {
    if !(tenor > 0.0) {
        return Err(Error::InvalidParameter(format!("tenor {tenor} must be > 0")));
    }
    for &t_u in forward_terms {
        ts.check_horizon(t_u + tenor)?;
    }
    let rows: Vec<(Vec<Option<f64>>, Vec<f64>)> = forward_terms
        .par_iter()
        .map(|&t_u| -> Result<_> {
            let expiry = (t_u + tenor).min(ts.horizon());
            let (calls, fwd_u, fwd_ratio) = forward_start_prices(
                ts,
                t_u,
                expiry,
                1.0,
                &moneyness.iter().map(|&k| (k, true)).collect::<Vec<_>>(),
                x0,
                cfg,
            )?;
            let mut vols = Vec::with_capacity(moneyness.len());
            for (&k, &call) in moneyness.iter().zip(&calls) {
                let is_call = k >= fwd_ratio;
                let normalized = if is_call { call / fwd_u } else { call / fwd_u - (fwd_ratio - k) };
                let vol = implied_vol(normalized.max(0.0), fwd_ratio, k, tenor, 1.0, is_call).ok();
                vols.push(vol);
            }
            Ok((vols, calls))
        })
        .collect::<Result<_>>()?;
    let (vols, prices) = rows.into_iter().unzip();
    Ok(SkewSurface {
        tenor,
        forward_terms: forward_terms.to_vec(),
        moneyness: moneyness.to_vec(),
        vols,
        prices,
    })
}
