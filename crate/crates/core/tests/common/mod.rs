//! Oracles shared by the integration tests. Nothing here calls into the
//! pricing code paths it is used to check.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use tdheston::{PeriodParams, TermStructure};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Compensated accumulator.
#[derive(Clone, Copy, Default)]
struct Kahan {
    sum: Complex64,
    carry: Complex64,
}

impl Kahan {
    fn new(v: Complex64) -> Self {
        Self { sum: v, carry: Complex64::new(0.0, 0.0) }
    }

    fn add(&mut self, v: Complex64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

fn rhs(p: &PeriodParams, x: f64, d: Complex64) -> (Complex64, Complex64) {
    let dd = 0.5 * p.sigma * p.sigma * d * d - (p.kappa - I * p.rho * p.sigma * x) * d - 0.5 * x * (x + I);
    let dc = I * p.mu * x + p.kappa * p.theta * d;
    (dc, dd)
}

/// Integrates the Riccati pair over `tau` from `(c0, d0)` with an adaptive
/// Dormand–Prince 5(4) scheme.
pub fn riccati_ode(tau: f64, x: f64, c0: Complex64, d0: Complex64, p: &PeriodParams, tol: f64) -> (Complex64, Complex64) {
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let mut c = Kahan::new(c0);
    let mut d = Kahan::new(d0);
    let mut t = 0.0;
    let mut h = (tau / 100.0).min(1e-3);
    while t < tau {
        if t + h > tau {
            h = tau - t;
        }
        let mut kc = [Complex64::new(0.0, 0.0); 7];
        let mut kd = [Complex64::new(0.0, 0.0); 7];
        for s in 0..7 {
            let mut ds = Complex64::new(0.0, 0.0);
            for j in 0..s {
                ds += A[s][j] * kd[j];
            }
            let (a, b) = rhs(p, x, d.sum + h * ds);
            kc[s] = a;
            kd[s] = b;
        }
        let mut inc_c5 = Complex64::new(0.0, 0.0);
        let mut inc_d5 = Complex64::new(0.0, 0.0);
        let mut err_c = Complex64::new(0.0, 0.0);
        let mut err_d = Complex64::new(0.0, 0.0);
        for s in 0..7 {
            inc_c5 += h * B5[s] * kc[s];
            inc_d5 += h * B5[s] * kd[s];
            err_c += h * (B5[s] - B4[s]) * kc[s];
            err_d += h * (B5[s] - B4[s]) * kd[s];
        }
        let scale_d = tol * (1.0 + d.sum.norm());
        let scale_c = tol * (1.0 + c.sum.norm());
        let err = (err_d.norm() / scale_d).max(err_c.norm() / scale_c);
        if err <= 1.0 {
            t += h;
            c.add(inc_c5);
            d.add(inc_d5);
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    (c.sum, d.sum)
}

/// Backward integration through a term structure over `[0, t]`.
pub fn chained_ode(ts: &TermStructure, t: f64, x: f64, tol: f64) -> (Complex64, Complex64) {
    let mut c = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    let starts: Vec<f64> = ts.starts().collect();
    for (start, period) in starts.iter().zip(ts.periods()).rev() {
        let hi = period.end.min(t);
        if hi <= *start {
            continue;
        }
        let (nc, nd) = riccati_ode(hi - start, x, c, d, &period.params, tol);
        c = nc;
        d = nd;
    }
    (c, d)
}

/// Seeded generator for test fixtures.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

/// Path-wise full-truncation Euler returning `(x_u, x_v)` per path.
pub fn simulate_pairs(
    ts: &TermStructure,
    x0: f64,
    t_u: f64,
    t_v: f64,
    n_paths: usize,
    steps_per_year: usize,
    seed: u64,
) -> Vec<(f64, f64)> {
    let mut g = rng(seed);
    let n_steps = ((t_v * steps_per_year as f64).round() as usize).max(1);
    let dt = t_v / n_steps as f64;
    let fix_step = (t_u / dt).round() as usize;
    let mut out = Vec::with_capacity(n_paths);
    for _ in 0..n_paths {
        let mut x = x0;
        let mut v = ts.v0();
        let mut x_u = x0;
        for n in 0..n_steps {
            if n == fix_step {
                x_u = x;
            }
            let t = (n as f64 + 0.5) * dt;
            let p = ts.params_at(t).unwrap();
            let z1: f64 = StandardNormal.sample(&mut g);
            let z2: f64 = StandardNormal.sample(&mut g);
            let vp = v.max(0.0);
            let s = (vp * dt).sqrt();
            x += (p.mu - 0.5 * vp) * dt + s * (p.rho * z1 + (1.0 - p.rho * p.rho).sqrt() * z2);
            v += p.kappa * (p.theta - vp) * dt + p.sigma * s * z1;
        }
        if fix_step >= n_steps {
            x_u = x;
        }
        out.push((x_u, x));
    }
    out
}

/// Sample mean and standard error.
pub fn mean_se(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.into_iter().collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Monte Carlo price of the forward-start call `(S_v - k S_u)^+`.
pub fn forward_start_mc(
    ts: &TermStructure,
    x0: f64,
    t_u: f64,
    t_v: f64,
    k: f64,
    n_paths: usize,
    steps_per_year: usize,
    seed: u64,
) -> (f64, f64) {
    let pairs = simulate_pairs(ts, x0, t_u, t_v, n_paths, steps_per_year, seed);
    mean_se(pairs.iter().map(|(xu, xv)| (xv.exp() - k * xu.exp()).max(0.0)))
}
