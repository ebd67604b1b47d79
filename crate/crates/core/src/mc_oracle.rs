//! Euler Monte Carlo of the log-price and variance, used to cross-check the
//! transform pricer.
//!
//! Steps land exactly on period boundaries so each step sees one parameter
//! set. Paths are generated in fixed-size blocks, each with its own ChaCha
//! stream derived from the seed, so results do not depend on the number of
//! worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::heston_cf::PeriodParams;
use crate::term_structure::TermStructure;
use crate::transform_pricing::VanillaSpec;

/// Treatment of the variance at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Negative variance is kept in the state but replaced by zero in drift
    /// and diffusion.
    FullTruncation,
    /// Variance is clamped to zero whenever a step would take it below.
    Absorbing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub scheme: Scheme,
    pub seed: u64,
    /// Pair each path with its mirror (all normals negated).
    pub antithetic: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_paths: 100_000,
            dt: 1.0 / 365.0,
            scheme: Scheme::FullTruncation,
            seed: 0,
            antithetic: false,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(Error::InvalidParameter(format!("n_paths = {} must be >= 2", self.n_paths)));
        }
        if self.antithetic && self.n_paths % 2 != 0 {
            return Err(Error::InvalidParameter("antithetic sampling needs an even path count".into()));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt = {} must be > 0", self.dt)));
        }
        Ok(())
    }
}

/// Paths per independently seeded block.
const BLOCK: usize = 4096;

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

/// Terminal log-price and variance of every path.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminalSamples {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    /// Consecutive pairs are antithetic and are averaged before the error
    /// estimate.
    pub antithetic: bool,
}

impl TerminalSamples {
    /// Mean of `f(x, v)` over the paths.
    pub fn estimate(&self, f: impl Fn(f64, f64) -> f64) -> Estimate {
        let values: Vec<f64> = if self.antithetic {
            self.x
                .chunks_exact(2)
                .zip(self.v.chunks_exact(2))
                .map(|(x, v)| 0.5 * (f(x[0], v[0]) + f(x[1], v[1])))
                .collect()
        } else {
            self.x.iter().zip(&self.v).map(|(&x, &v)| f(x, v)).collect()
        };
        mean_and_error(&values)
    }

    pub fn mean_x(&self) -> Estimate {
        self.estimate(|x, _| x)
    }

    /// Mean of `e^{x_t}`, the martingale check when the drift is zero.
    pub fn mean_price(&self) -> Estimate {
        self.estimate(|x, _| x.exp())
    }
}

fn mean_and_error(values: &[f64]) -> Estimate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Estimate {
        mean,
        std_error: (var / n).sqrt(),
    }
}

/// Step sizes and parameters from 0 to `t`, shortened to hit every period
/// boundary exactly.
fn step_plan(ts: &TermStructure, t: f64, dt: f64) -> Vec<(usize, f64, PeriodParams)> {
    let mut plan = Vec::new();
    for (start, period) in ts.starts().zip(ts.periods()) {
        let hi = period.end.min(t);
        if hi <= start {
            break;
        }
        let len = hi - start;
        let n = ((len / dt) - 1e-9).ceil().max(1.0) as usize;
        plan.push((n, len / n as f64, period.params));
    }
    plan
}

struct Stepper {
    dt: f64,
    sqrt_dt: f64,
    drift: f64,
    kappa: f64,
    theta: f64,
    sigma: f64,
    rho: f64,
    rho_bar: f64,
}

impl Stepper {
    fn new(dt: f64, p: &PeriodParams) -> Self {
        Self {
            dt,
            sqrt_dt: dt.sqrt(),
            drift: p.mu * dt,
            kappa: p.kappa,
            theta: p.theta,
            sigma: p.sigma,
            rho: p.rho,
            rho_bar: (1.0 - p.rho * p.rho).max(0.0).sqrt(),
        }
    }

    #[inline]
    fn step(&self, x: &mut f64, v: &mut f64, z1: f64, z2: f64, scheme: Scheme) {
        let vp = v.max(0.0);
        let sv = (vp).sqrt() * self.sqrt_dt;
        *x += self.drift - 0.5 * vp * self.dt + sv * (self.rho * z1 + self.rho_bar * z2);
        let next = *v + self.kappa * (self.theta - vp) * self.dt + self.sigma * sv * z1;
        *v = match scheme {
            Scheme::FullTruncation => next,
            Scheme::Absorbing => next.max(0.0),
        };
    }
}

/// Simulates `(x_t, v_t)` from `(x0, v0)` under the term structure.
pub fn simulate_terminal(ts: &TermStructure, t: f64, x0: f64, cfg: &McConfig) -> Result<TerminalSamples> {
    cfg.validate()?;
    let t = ts.check_horizon(t)?;
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("maturity {t} must be > 0")));
    }
    let plan: Vec<(usize, Stepper)> = step_plan(ts, t, cfg.dt)
        .into_iter()
        .map(|(n, dt, p)| (n, Stepper::new(dt, &p)))
        .collect();
    let v0 = ts.v0();
    let mut x = vec![x0; cfg.n_paths];
    let mut v = vec![v0; cfg.n_paths];

    x.par_chunks_mut(BLOCK)
        .zip(v.par_chunks_mut(BLOCK))
        .enumerate()
        .for_each(|(block, (xs, vs))| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(block as u64);
            let stride = if cfg.antithetic { 2 } else { 1 };
            for k in (0..xs.len()).step_by(stride) {
                let (mut xa, mut va) = (x0, v0);
                let (mut xb, mut vb) = (x0, v0);
                for (n, s) in &plan {
                    for _ in 0..*n {
                        let z1: f64 = StandardNormal.sample(&mut rng);
                        let z2: f64 = StandardNormal.sample(&mut rng);
                        s.step(&mut xa, &mut va, z1, z2, cfg.scheme);
                        if cfg.antithetic {
                            s.step(&mut xb, &mut vb, -z1, -z2, cfg.scheme);
                        }
                    }
                }
                xs[k] = xa;
                vs[k] = va.max(0.0);
                if cfg.antithetic {
                    xs[k + 1] = xb;
                    vs[k + 1] = vb.max(0.0);
                }
            }
        });

    Ok(TerminalSamples {
        x,
        v,
        antithetic: cfg.antithetic,
    })
}

/// Discounted vanilla payoff mean and its standard error.
pub fn mc_vanilla_price(ts: &TermStructure, spec: &VanillaSpec, x0: f64, cfg: &McConfig) -> Result<Estimate> {
    spec.validate()?;
    let samples = simulate_terminal(ts, spec.maturity, x0, cfg)?;
    let (k, df) = (spec.strike, spec.discount);
    let est = if spec.is_call {
        samples.estimate(|x, _| df * (x.exp() - k).max(0.0))
    } else {
        samples.estimate(|x, _| df * (k - x.exp()).max(0.0))
    };
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(v0: f64, kappa: f64, theta: f64, sigma: f64, rho: f64, mu: f64) -> TermStructure {
        TermStructure::flat(v0, 5.0, PeriodParams::new(kappa, theta, sigma, rho, mu).unwrap()).unwrap()
    }

    #[test]
    fn plan_hits_boundaries() {
        let ts = TermStructure::from_pairs(
            0.04,
            [
                (0.1, PeriodParams::driftless(1.0, 0.04, 0.3, 0.0).unwrap()),
                (1.0, PeriodParams::driftless(2.0, 0.05, 0.4, -0.5).unwrap()),
            ],
        )
        .unwrap();
        let plan = step_plan(&ts, 0.55, 0.04);
        assert_eq!(plan.len(), 2);
        assert_eq!(plan[0].0, 3);
        assert!((plan[0].0 as f64 * plan[0].1 - 0.1).abs() < 1e-15);
        assert!((plan[1].0 as f64 * plan[1].1 - 0.45).abs() < 1e-15);
        assert!(plan.iter().all(|p| p.1 <= 0.04 + 1e-15));
    }

    #[test]
    fn seeded_determinism() {
        let ts = flat(0.04, 1.5, 0.04, 0.6, -0.7, 0.0);
        let cfg = McConfig { n_paths: 5000, dt: 0.05, ..Default::default() };
        let a = simulate_terminal(&ts, 1.0, 0.0, &cfg).unwrap();
        let b = simulate_terminal(&ts, 1.0, 0.0, &cfg).unwrap();
        assert_eq!(a, b);
        let c = simulate_terminal(&ts, 1.0, 0.0, &McConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(a.x, c.x);
    }

    #[test]
    fn variance_samples_are_non_negative() {
        let ts = flat(0.01, 0.5, 0.01, 1.5, -0.9, 0.0);
        for scheme in [Scheme::FullTruncation, Scheme::Absorbing] {
            let cfg = McConfig { n_paths: 2000, dt: 0.02, scheme, ..Default::default() };
            let s = simulate_terminal(&ts, 1.0, 0.0, &cfg).unwrap();
            assert!(s.v.iter().all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn frozen_variance_is_brownian() {
        let theta = 0.09;
        let ts = flat(theta, 1.0, theta, 1e-8, 0.3, 0.02);
        let cfg = McConfig { n_paths: 40_000, dt: 0.1, ..Default::default() };
        let s = simulate_terminal(&ts, 2.0, 1.0, &cfg).unwrap();
        let m = s.mean_x();
        assert!((m.mean - (1.0 + (0.02 - theta / 2.0) * 2.0)).abs() < 3.0 * m.std_error);
        let var = s.estimate(|x, _| (x - m.mean).powi(2));
        assert!((var.mean - theta * 2.0).abs() < 3.0 * var.std_error);
    }

    #[test]
    fn degenerate_variance_gives_intrinsic() {
        let ts = flat(1e-10, 1.0, 1e-10, 1e-8, 0.0, 0.0);
        let cfg = McConfig { n_paths: 100, dt: 0.1, ..Default::default() };
        let spec = VanillaSpec { strike: 90.0, maturity: 1.0, is_call: true, discount: 0.95 };
        let est = mc_vanilla_price(&ts, &spec, 100f64.ln(), &cfg).unwrap();
        assert!((est.mean - 9.5).abs() < 1e-3, "{est:?}");
    }

    #[test]
    fn antithetic_pairs_mirror() {
        let ts = flat(0.04, 1.0, 0.04, 1e-8, 0.0, 0.0);
        let cfg = McConfig { n_paths: 10, dt: 0.25, antithetic: true, ..Default::default() };
        let s = simulate_terminal(&ts, 1.0, 0.0, &cfg).unwrap();
        for p in s.x.chunks(2) {
            // same drift, mirrored noise
            assert!((p[0] + p[1] + 0.04).abs() < 1e-7, "{p:?}");
        }
        assert!(McConfig { n_paths: 9, ..cfg }.validate().is_err());
    }

    #[test]
    fn rejects_bad_config() {
        let ts = flat(0.04, 1.0, 0.04, 0.3, 0.0, 0.0);
        assert!(simulate_terminal(&ts, 1.0, 0.0, &McConfig { n_paths: 1, ..Default::default() }).is_err());
        assert!(simulate_terminal(&ts, 1.0, 0.0, &McConfig { dt: 0.0, ..Default::default() }).is_err());
        assert!(matches!(
            simulate_terminal(&ts, 6.0, 0.0, &McConfig::default()),
            Err(Error::OutOfHorizon { .. })
        ));
    }
}
