//! Black formula on a forward and its inverse.

use libm::erfc;

use crate::error::{Error, Result};

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Discounted Black price of a call or put on `forward`.
pub fn black_scholes_price(forward: f64, strike: f64, vol: f64, t: f64, discount: f64, is_call: bool) -> f64 {
    let total = vol * t.max(0.0).sqrt();
    let undiscounted = if total <= 0.0 || strike <= 0.0 {
        if is_call {
            (forward - strike).max(0.0)
        } else {
            (strike - forward).max(0.0)
        }
    } else {
        let d1 = (forward / strike).ln() / total + 0.5 * total;
        let d2 = d1 - total;
        if is_call {
            forward * norm_cdf(d1) - strike * norm_cdf(d2)
        } else {
            strike * norm_cdf(-d2) - forward * norm_cdf(-d1)
        }
    };
    discount * undiscounted
}

/// Bracket of the implied-vol search.
pub const MAX_IMPLIED_VOL: f64 = 5.0;

/// Volatility reproducing `price` under [`black_scholes_price`].
///
/// Brent's method on `[0, 5]`; the lower end is the discounted intrinsic.
pub fn implied_vol(price: f64, forward: f64, strike: f64, t: f64, discount: f64, is_call: bool) -> Result<f64> {
    if !(forward > 0.0 && strike > 0.0 && t > 0.0 && discount > 0.0) || !price.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "implied vol needs positive forward, strike, time and discount (F={forward}, K={strike}, t={t}, df={discount})"
        )));
    }
    let intrinsic = black_scholes_price(forward, strike, 0.0, t, discount, is_call);
    let upper = black_scholes_price(forward, strike, MAX_IMPLIED_VOL, t, discount, is_call);
    if price < intrinsic || price > upper {
        return Err(Error::NoSolution {
            price,
            lower: intrinsic,
            upper,
        });
    }
    if price == intrinsic {
        return Ok(0.0);
    }
    let f = |v: f64| black_scholes_price(forward, strike, v, t, discount, is_call) - price;
    Ok(brent(f, 0.0, MAX_IMPLIED_VOL, intrinsic - price, upper - price))
}

/// Brent root finder for a bracketed sign change.
fn brent(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> f64 {
    if fb == 0.0 {
        return b;
    }
    if fa == 0.0 {
        return a;
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..300 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 1e-300;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return b;
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * m * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    b
}
