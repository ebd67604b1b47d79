//! Adaptive panel Gauss–Legendre integration of inversion integrands on
//! `[0, inf)`.
//!
//! The integrand is vector valued so that a batch of strikes sharing one
//! characteristic function is integrated on one node set: the expensive
//! transform is evaluated once per node and only the strike phase differs.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integral of a scalar function over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Cached rule for the default panel order.
pub(crate) fn rule(order: usize) -> std::borrow::Cow<'static, GaussLegendre> {
    static GL32: OnceLock<GaussLegendre> = OnceLock::new();
    if order == 32 {
        std::borrow::Cow::Borrowed(GL32.get_or_init(|| GaussLegendre::new(32)))
    } else {
        std::borrow::Cow::Owned(GaussLegendre::new(order))
    }
}

/// Settings of the inversion quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionConfig {
    /// Target absolute error of each probability.
    pub abs_tol: f64,
    /// Initial truncation of the transform variable; extended geometrically.
    pub max_arg: f64,
    pub panel_order: usize,
    /// The sliver `[0, min_arg)` is handled by the integrand's finite limit.
    pub min_arg: f64,
    /// Cap on the number of accepted panels before giving up.
    pub max_panels: usize,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            max_arg: 200.0,
            panel_order: 32,
            min_arg: 1e-8,
            max_panels: 4000,
        }
    }
}

impl InversionConfig {
    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("abs_tol = {} must be > 0", self.abs_tol)));
        }
        if !(self.min_arg > 0.0) || !(self.max_arg > self.min_arg) {
            return Err(Error::InvalidParameter(format!(
                "need max_arg > min_arg > 0 (got {} and {})",
                self.max_arg, self.min_arg
            )));
        }
        if self.panel_order < 2 {
            return Err(Error::InvalidParameter("panel_order must be >= 2".into()));
        }
        Ok(())
    }
}

/// Panels narrower than this are accepted regardless of the error estimate
/// (only reachable when the tolerance is below rounding noise).
const MIN_PANEL_WIDTH: f64 = 1e-6;

/// Doublings of the truncation point before falling back to a tapered tail.
const MAX_EXTENSIONS: usize = 4;

/// Once a whole panel beyond this point carries less than
/// `DECAY_FRACTION * budget` of absolute mass the integrand is treated as
/// decayed and integration stops.
const DECAY_CHECK_FROM: f64 = 4.0;
const DECAY_FRACTION: f64 = 1e-3;

struct Integrator<'a, F> {
    f: F,
    dim: usize,
    rule: &'a GaussLegendre,
    buf: Vec<f64>,
    panels: usize,
    max_panels: usize,
}

impl<F: FnMut(f64, &mut [f64])> Integrator<'_, F> {
    /// GL estimate of the integral and of the integral of `|f|` per component.
    fn panel(&mut self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = vec![0.0; self.dim];
        let mut abs = vec![0.0; self.dim];
        for (x, w) in self.rule.nodes().iter().zip(self.rule.weights()) {
            (self.f)(mid + half * x, &mut self.buf);
            for k in 0..self.dim {
                sum[k] += w * self.buf[k];
                abs[k] += w * self.buf[k].abs();
            }
        }
        sum.iter_mut().for_each(|s| *s *= half);
        abs.iter_mut().for_each(|s| *s *= half);
        (sum, abs)
    }

    /// Bisects until the halves agree with the whole to `tol` per unit width.
    fn adaptive(&mut self, a: f64, b: f64, tol_density: f64, out: &mut [f64], out_abs: &mut [f64]) -> Result<()> {
        let mut stack = vec![(a, b, self.panel(a, b))];
        while let Some((lo, hi, (whole, _))) = stack.pop() {
            let mid = 0.5 * (lo + hi);
            let left = self.panel(lo, mid);
            let right = self.panel(mid, hi);
            let err = whole
                .iter()
                .zip(left.0.iter().zip(&right.0))
                .map(|(w, (l, r))| (w - l - r).abs())
                .fold(0.0, f64::max);
            if err <= tol_density * (hi - lo) || hi - lo < MIN_PANEL_WIDTH {
                for k in 0..self.dim {
                    out[k] += left.0[k] + right.0[k];
                    out_abs[k] += left.1[k] + right.1[k];
                }
                self.panels += 1;
                if self.panels > self.max_panels {
                    return Err(Error::QuadratureFailure {
                        panels: self.panels,
                        partial: out.first().copied().unwrap_or(f64::NAN),
                    });
                }
            } else {
                stack.push((mid, hi, right));
                stack.push((lo, mid, left));
            }
        }
        Ok(())
    }
}

/// Integrates `f` over `[0, inf)` for inversion integrands.
///
/// `f(x, out)` writes the integrand components at `x`; every component must
/// have a finite limit at 0. The sliver `[0, min_arg)` uses the value at
/// `min_arg`. Panels are laid out geometrically up to `max_arg` (stopping
/// early once a panel is negligible) and then extended by doubling until a
/// whole extension adds less than its share of `tol` in absolute mass. `tol` is the absolute error budget of the integral.
pub fn integrate_half_line<F>(dim: usize, tol: f64, cfg: &InversionConfig, mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(f64, &mut [f64]),
{
    cfg.validate()?;
    let rule = rule(cfg.panel_order);
    let mut total = vec![0.0; dim];
    let mut buf = vec![0.0; dim];

    // [0, min_arg): one-term expansion around the removable singularity.
    f(cfg.min_arg, &mut buf);
    for k in 0..dim {
        total[k] += buf[k] * cfg.min_arg;
    }

    let mut integ = Integrator {
        f,
        dim,
        rule: &rule,
        buf,
        panels: 0,
        max_panels: cfg.max_panels,
    };

    // Geometric layout [min_arg, 1], [1, 2], [2, 4], ... up to max_arg.
    let mut edges = vec![cfg.min_arg];
    let mut e = 1.0f64.max(2.0 * cfg.min_arg);
    while e < cfg.max_arg {
        edges.push(e);
        e *= 2.0;
    }
    edges.push(cfg.max_arg);
    let n_top = edges.len() - 1 + 8;
    let budget = tol / n_top as f64;

    for w in edges.windows(2) {
        let mut part_abs = vec![0.0; dim];
        integ.adaptive(w[0], w[1], budget / (w[1] - w[0]), &mut total, &mut part_abs)?;
        let mass = part_abs.iter().fold(0.0, |m: f64, v| m.max(*v));
        if w[0] >= DECAY_CHECK_FROM && mass < DECAY_FRACTION * budget {
            return Ok(total);
        }
    }

    // Extend [hi, 2 hi], [2 hi, 4 hi], ... until the added mass is negligible.
    let mut lo = cfg.max_arg;
    for extension in 0..=MAX_EXTENSIONS {
        let hi = 2.0 * lo;
        let mut part = vec![0.0; dim];
        let mut part_abs = vec![0.0; dim];
        if extension == MAX_EXTENSIONS {
            // Tail still carries mass: the integrand oscillates without
            // decaying (lattice-like distributions). Average the truncated
            // integral over the last doubling, i.e. integrate the final chunk
            // against the linear taper (2 hi' - x) / hi' with hi' = lo.
            log::warn!("inversion tail not decayed at {lo}; using tapered truncation");
            let inner = &mut integ.f;
            let mut tapered = Integrator {
                f: |x: f64, out: &mut [f64]| {
                    inner(x, out);
                    let w = (hi - x) / lo;
                    out.iter_mut().for_each(|v| *v *= w);
                },
                dim,
                rule: &rule,
                buf: vec![0.0; dim],
                panels: integ.panels,
                max_panels: cfg.max_panels,
            };
            tapered.adaptive(lo, hi, budget / (hi - lo), &mut part, &mut part_abs)?;
            for k in 0..dim {
                total[k] += part[k];
            }
            break;
        }
        integ.adaptive(lo, hi, budget / (hi - lo), &mut part, &mut part_abs)?;
        for k in 0..dim {
            total[k] += part[k];
        }
        let mass = part_abs.iter().fold(0.0, |m: f64, v| m.max(*v));
        if mass < budget {
            break;
        }
        lo = hi;
    }
    Ok(total)
}
