//! Bootstrap calibration of a piecewise-constant term structure to a
//! volatility surface.
//!
//! Quotes are moved onto the longest forward `F_P`: an option of maturity
//! `T_i` and strike `K` on the spot becomes an option on `F_P` with strike
//! `K F_P / F_{T_i}`, priced undiscounted and in basis points of `F_P`. The
//! model is driftless on that forward. Periods end at the surface tenors and
//! are fitted one at a time, earliest first, each by a simplex search in
//! unbounded coordinates mapped onto the search box through `tanh`.

mod nelder_mead;

pub use nelder_mead::{nelder_mead_minimize, Minimum, NelderMeadConfig};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::heston_cf::PeriodParams;
use crate::term_structure::{Period, TermStructure};
use crate::transform_pricing::{black_scholes_price, vanilla_prices, InversionConfig};

/// Basis points per unit.
pub const BP: f64 = 1e4;

/// Implied volatilities on a tenor by moneyness grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VolSurface {
    pub spot: f64,
    /// Year fractions, increasing.
    pub tenors: Vec<f64>,
    /// Strike over spot.
    pub moneyness: Vec<f64>,
    /// `vols[i][j]` for moneyness `i` and tenor `j`, as decimals.
    pub vols: Vec<Vec<f64>>,
}

impl VolSurface {
    pub fn new(spot: f64, tenors: Vec<f64>, moneyness: Vec<f64>, vols: Vec<Vec<f64>>) -> Result<Self> {
        if !(spot > 0.0) {
            return Err(Error::Data(format!("spot {spot} must be > 0")));
        }
        if tenors.is_empty() || moneyness.is_empty() {
            return Err(Error::Data("surface needs at least one tenor and one moneyness".into()));
        }
        if tenors.windows(2).any(|w| !(w[1] > w[0])) || !(tenors[0] > 0.0) {
            return Err(Error::Data("tenors must be positive and strictly increasing".into()));
        }
        if moneyness.iter().any(|m| !(*m > 0.0)) {
            return Err(Error::Data("moneyness must be positive".into()));
        }
        if vols.len() != moneyness.len() || vols.iter().any(|r| r.len() != tenors.len()) {
            return Err(Error::Data(format!(
                "vol grid must be {} x {}",
                moneyness.len(),
                tenors.len()
            )));
        }
        if vols.iter().flatten().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Data("vols must be positive".into()));
        }
        Ok(Self {
            spot,
            tenors,
            moneyness,
            vols,
        })
    }
}

/// Forwards of the underlying at a set of delivery dates.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCurve {
    pub tenors: Vec<f64>,
    pub forwards: Vec<f64>,
}

impl ForwardCurve {
    pub fn new(tenors: Vec<f64>, forwards: Vec<f64>) -> Result<Self> {
        if tenors.is_empty() || tenors.len() != forwards.len() {
            return Err(Error::Data("forward curve needs matching, non-empty tenors and forwards".into()));
        }
        if tenors.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Data("forward tenors must be strictly increasing".into()));
        }
        if forwards.iter().any(|f| !(*f > 0.0) || !f.is_finite()) {
            return Err(Error::Data("forwards must be positive".into()));
        }
        Ok(Self { tenors, forwards })
    }

    /// The forward of the last date, on which all quotes are expressed.
    pub fn base(&self) -> f64 {
        *self.forwards.last().expect("non-empty by construction")
    }

    pub fn forward_at(&self, t: f64) -> Option<f64> {
        self.tenors
            .iter()
            .position(|&s| (s - t).abs() <= 1e-9 * t.max(1.0))
            .map(|i| self.forwards[i])
    }
}

/// Weights by distance from the money: 1.00, 0.95/1.05, 0.90/1.10, 0.85/1.15.
pub const DEFAULT_WEIGHTS: [f64; 4] = [100.0, 45.0, 35.0, 5.0];

/// Moneyness step between weight tiers.
const TIER_STEP: f64 = 0.05;

/// Weight of a quote at `moneyness`; tiers beyond the list reuse the last.
pub fn tier_weight(moneyness: f64, tiers: &[f64]) -> f64 {
    let idx = ((moneyness - 1.0).abs() / TIER_STEP).round() as usize;
    tiers[idx.min(tiers.len() - 1)]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quote {
    pub tenor_index: usize,
    pub moneyness_index: usize,
    pub maturity: f64,
    pub moneyness: f64,
    pub adjusted_strike: f64,
    pub is_call: bool,
    pub vol: f64,
    /// Undiscounted price in bp of the base forward.
    pub target_bp: f64,
    pub weight: f64,
}

/// Quotes ordered tenor by tenor, moneyness ascending within each tenor.
#[derive(Debug, Clone, PartialEq)]
pub struct QuoteGrid {
    pub base_forward: f64,
    pub tenors: Vec<f64>,
    pub moneyness: Vec<f64>,
    pub quotes: Vec<Quote>,
}

impl QuoteGrid {
    pub fn for_tenor(&self, j: usize) -> &[Quote] {
        let n = self.moneyness.len();
        &self.quotes[j * n..(j + 1) * n]
    }

    /// Targets laid out by moneyness (rows) and tenor (columns).
    pub fn targets_bp(&self) -> Vec<Vec<f64>> {
        self.to_matrix(|q| q.target_bp)
    }

    fn to_matrix(&self, f: impl Fn(&Quote) -> f64) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.tenors.len()]; self.moneyness.len()];
        for q in &self.quotes {
            out[q.moneyness_index][q.tenor_index] = f(q);
        }
        out
    }
}

/// Converts a spot volatility surface into undiscounted options on the base
/// forward.
pub fn quotes_from_surface(surface: &VolSurface, curve: &ForwardCurve, tiers: &[f64]) -> Result<QuoteGrid> {
    if tiers.is_empty() || tiers.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::Data("weights must be a non-empty list of positive numbers".into()));
    }
    let base = curve.base();
    let mut quotes = Vec::with_capacity(surface.tenors.len() * surface.moneyness.len());
    for (j, &t) in surface.tenors.iter().enumerate() {
        let fwd = curve
            .forward_at(t)
            .ok_or_else(|| Error::Data(format!("no forward for tenor {t}")))?;
        for (i, &m) in surface.moneyness.iter().enumerate() {
            let adjusted_strike = m * surface.spot * base / fwd;
            let is_call = adjusted_strike > base;
            let vol = surface.vols[i][j];
            let target = black_scholes_price(base, adjusted_strike, vol, t, 1.0, is_call) / base * BP;
            quotes.push(Quote {
                tenor_index: j,
                moneyness_index: i,
                maturity: t,
                moneyness: m,
                adjusted_strike,
                is_call,
                vol,
                target_bp: target,
                weight: tier_weight(m, tiers),
            });
        }
    }
    Ok(QuoteGrid {
        base_forward: base,
        tenors: surface.tenors.clone(),
        moneyness: surface.moneyness.clone(),
        quotes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamBound {
    pub min: f64,
    pub max: f64,
}

impl ParamBound {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }
}

/// Search box of the calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub v0: ParamBound,
    pub theta: ParamBound,
    pub kappa: ParamBound,
    pub sigma: ParamBound,
    pub rho: ParamBound,
    /// Width of the `tanh` transition.
    pub m: f64,
}

impl Bounds {
    /// Tight box on volatility of variance and mean reversion.
    pub fn constrained() -> Self {
        Self {
            v0: ParamBound::new(0.0, 1.0),
            theta: ParamBound::new(0.0, 1.0),
            kappa: ParamBound::new(0.0, 20.0),
            sigma: ParamBound::new(0.0, 1.5),
            rho: ParamBound::new(-1.0, 1.0),
            m: 100.0,
        }
    }

    pub fn unconstrained() -> Self {
        Self {
            v0: ParamBound::new(0.0, 100.0),
            theta: ParamBound::new(0.0, 100.0),
            kappa: ParamBound::new(0.0, 100.0),
            sigma: ParamBound::new(0.0, 100.0),
            rho: ParamBound::new(-1.0, 1.0),
            m: 100.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, b) in self.named() {
            if !(b.min < b.max) || !b.min.is_finite() || !b.max.is_finite() {
                return Err(Error::InvalidParameter(format!("bound {name}: need min < max")));
            }
        }
        if self.rho.min < -1.0 || self.rho.max > 1.0 {
            return Err(Error::InvalidParameter("rho bounds must lie in [-1, 1]".into()));
        }
        if self.v0.min < 0.0 || self.theta.min < 0.0 || self.kappa.min < 0.0 || self.sigma.min < 0.0 {
            return Err(Error::InvalidParameter("v0, theta, kappa and sigma bounds must be >= 0".into()));
        }
        if !(self.m > 0.0) {
            return Err(Error::InvalidParameter(format!("transition constant m = {} must be > 0", self.m)));
        }
        Ok(())
    }

    pub fn named(&self) -> [(&'static str, ParamBound); 5] {
        [
            ("v0", self.v0),
            ("theta", self.theta),
            ("kappa", self.kappa),
            ("sigma", self.sigma),
            ("rho", self.rho),
        ]
    }
}

/// Maps the real line onto `(min, max)`.
pub fn param_transform(p_tilde: f64, min: f64, max: f64, m: f64) -> f64 {
    min + 0.5 * (max - min) * (1.0 + (p_tilde / m).tanh())
}

/// Inverse of [`param_transform`]; values at or beyond the bounds map to a
/// large finite coordinate.
pub fn param_inverse(p: f64, min: f64, max: f64, m: f64) -> f64 {
    const EDGE: f64 = 1.0 - 1e-15;
    let y = (2.0 * (p - min) / (max - min) - 1.0).clamp(-EDGE, EDGE);
    m * y.atanh()
}

/// Objective value assigned to candidates the pricer rejects.
pub const PENALTY: f64 = 1e12;

/// Undiscounted model prices in bp of `base_forward` for quotes sharing one
/// maturity.
pub fn model_prices_bp(ts: &TermStructure, quotes: &[Quote], base_forward: f64, cfg: &InversionConfig) -> Result<Vec<f64>> {
    let Some(first) = quotes.first() else {
        return Ok(Vec::new());
    };
    if quotes.iter().any(|q| q.maturity != first.maturity) {
        return Err(Error::InvalidParameter("quotes must share one maturity".into()));
    }
    let options: Vec<(f64, bool)> = quotes.iter().map(|q| (q.adjusted_strike, q.is_call)).collect();
    let prices = vanilla_prices(ts, first.maturity, 1.0, &options, base_forward.ln(), cfg)?;
    Ok(prices.into_iter().map(|p| p / base_forward * BP).collect())
}

/// Weighted mean-square error (bp²) of `quotes` when `candidate` is
/// appended to `fixed_prefix` up to the quotes' maturity.
pub fn objective(
    candidate: &PeriodParams,
    v0: f64,
    fixed_prefix: &[Period],
    quotes: &[Quote],
    base_forward: f64,
    cfg: &InversionConfig,
) -> f64 {
    let Some(first) = quotes.first() else {
        return 0.0;
    };
    let mut periods = fixed_prefix.to_vec();
    periods.push(Period {
        end: first.maturity,
        params: *candidate,
    });
    let Ok(ts) = TermStructure::new(v0, periods) else {
        return PENALTY;
    };
    match model_prices_bp(&ts, quotes, base_forward, cfg) {
        Ok(model) => {
            let total: f64 = quotes.iter().map(|q| q.weight).sum();
            let value: f64 = quotes
                .iter()
                .zip(&model)
                .map(|(q, m)| q.weight / total * (m - q.target_bp).powi(2))
                .sum();
            if value.is_finite() {
                value
            } else {
                PENALTY
            }
        }
        Err(_) => PENALTY,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationConfig {
    pub inversion: InversionConfig,
    /// Step is in transformed coordinates.
    pub nelder_mead: NelderMeadConfig,
    /// Jittered restarts per period besides the plain start.
    pub restarts: usize,
    /// Half-width of the uniform jitter, in transformed coordinates.
    pub jitter: f64,
    /// Restart each simplex search once from its converged point.
    pub polish: bool,
    pub seed: u64,
    /// Periods whose largest absolute error exceeds this are reported.
    pub max_error_bp: Option<f64>,
    /// Start for the initial variance; defaults to the shortest ATM variance.
    pub v0_start: Option<f64>,
    /// Per-period starting parameters, overriding the warm start.
    pub starts: Vec<Option<PeriodParams>>,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            inversion: InversionConfig::default(),
            nelder_mead: NelderMeadConfig {
                initial_step: 20.0,
                ..NelderMeadConfig::default()
            },
            restarts: 2,
            jitter: 40.0,
            polish: true,
            seed: 0,
            max_error_bp: None,
            v0_start: None,
            starts: Vec::new(),
        }
    }
}

/// Outcome of fitting one period.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodFit {
    pub end: f64,
    pub objective: f64,
    pub evaluations: usize,
    /// Best objective per simplex iteration of the winning run.
    pub trace: Vec<f64>,
    pub feller: bool,
    pub max_abs_error_bp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    pub term_structure: TermStructure,
    /// Market minus model (bp), rows by moneyness, columns by tenor.
    pub errors_bp: Vec<Vec<f64>>,
    pub model_bp: Vec<Vec<f64>>,
    pub periods: Vec<PeriodFit>,
    pub feller_flags: Vec<bool>,
    pub warnings: Vec<String>,
}

fn feller(p: &PeriodParams) -> bool {
    2.0 * p.kappa * p.theta > p.sigma * p.sigma
}

/// Default first-period start: `(v0, theta, kappa, sigma, rho)`.
fn first_start(grid: &QuoteGrid) -> (f64, PeriodParams) {
    let atm = grid
        .for_tenor(0)
        .iter()
        .min_by(|a, b| (a.moneyness - 1.0).abs().total_cmp(&(b.moneyness - 1.0).abs()))
        .map(|q| q.vol)
        .unwrap_or(0.2);
    let v = atm * atm;
    (
        v,
        PeriodParams {
            kappa: 2.0,
            theta: v,
            sigma: 0.5,
            rho: -0.5,
            mu: 0.0,
        },
    )
}

struct Coordinates {
    bounds: Bounds,
    with_v0: bool,
}

impl Coordinates {
    fn to_tilde(&self, v0: f64, p: &PeriodParams) -> Vec<f64> {
        let b = &self.bounds;
        let inv = |x: f64, r: ParamBound| param_inverse(x, r.min, r.max, b.m);
        let mut out = Vec::with_capacity(5);
        if self.with_v0 {
            out.push(inv(v0, b.v0));
        }
        out.extend([inv(p.theta, b.theta), inv(p.kappa, b.kappa), inv(p.sigma, b.sigma), inv(p.rho, b.rho)]);
        out
    }

    fn from_tilde(&self, x: &[f64], fixed_v0: f64) -> (f64, PeriodParams) {
        let b = &self.bounds;
        let tr = |x: f64, r: ParamBound| param_transform(x, r.min, r.max, b.m);
        let (v0, rest) = if self.with_v0 { (tr(x[0], b.v0), &x[1..]) } else { (fixed_v0, x) };
        (
            v0,
            PeriodParams {
                theta: tr(rest[0], b.theta),
                kappa: tr(rest[1], b.kappa),
                sigma: tr(rest[2], b.sigma),
                rho: tr(rest[3], b.rho),
                mu: 0.0,
            },
        )
    }
}

/// Fits the term structure period by period.
pub fn bootstrap_calibrate(
    surface: &VolSurface,
    curve: &ForwardCurve,
    bounds: &Bounds,
    weights: &[f64],
    config: &CalibrationConfig,
) -> Result<CalibrationResult> {
    bounds.validate()?;
    config.inversion.validate()?;
    let grid = quotes_from_surface(surface, curve, weights)?;
    let base = grid.base_forward;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let (default_v0, mut warm) = first_start(&grid);
    let mut v0 = config.v0_start.unwrap_or(default_v0);
    let mut periods: Vec<Period> = Vec::with_capacity(grid.tenors.len());
    let mut fits = Vec::with_capacity(grid.tenors.len());
    let mut warnings = Vec::new();

    for (j, &end) in grid.tenors.iter().enumerate() {
        let quotes = grid.for_tenor(j);
        let coords = Coordinates {
            bounds: *bounds,
            with_v0: j == 0,
        };
        let start_params = config.starts.get(j).copied().flatten().unwrap_or(warm);
        let start = coords.to_tilde(v0, &start_params);
        let prefix = periods.clone();
        let f = |x: &[f64]| {
            let (v, p) = coords.from_tilde(x, v0);
            objective(&p, v, &prefix, quotes, base, &config.inversion)
        };

        let mut starts = vec![start.clone()];
        for _ in 0..config.restarts {
            starts.push(
                start
                    .iter()
                    .map(|s| s + rng.random_range(-config.jitter..=config.jitter))
                    .collect(),
            );
        }
        let mut best: Option<Minimum> = None;
        let mut evaluations = 0;
        for s in &starts {
            let mut run = nelder_mead_minimize(f, s, &config.nelder_mead);
            evaluations += run.evaluations;
            if config.polish {
                // A second pass from the converged point re-expands a simplex
                // that may have collapsed prematurely.
                let mut again = nelder_mead_minimize(f, &run.x, &config.nelder_mead);
                evaluations += again.evaluations;
                run.trace.append(&mut again.trace);
                again.trace = run.trace;
                run = again;
            }
            if best.as_ref().is_none_or(|b| run.value < b.value) {
                best = Some(run);
            }
        }
        let best = best.expect("at least one start");
        let (fitted_v0, params) = coords.from_tilde(&best.x, v0);
        params.validate()?;
        if j == 0 {
            v0 = fitted_v0;
        }
        periods.push(Period { end, params });
        let ts = TermStructure::new(v0, periods.clone())?;
        let model = model_prices_bp(&ts, quotes, base, &config.inversion)?;
        let max_abs = quotes
            .iter()
            .zip(&model)
            .map(|(q, m)| (q.target_bp - m).abs())
            .fold(0.0, f64::max);
        if let Some(limit) = config.max_error_bp {
            if max_abs > limit {
                let msg = format!("period ending {end}: max |error| {max_abs:.2} bp exceeds {limit} bp");
                log::warn!("{msg}");
                warnings.push(msg);
            }
        }
        log::info!(
            "period {} (end {end}): objective {:.4e}, {} evaluations, max |error| {max_abs:.2} bp",
            j + 1,
            best.value,
            evaluations
        );
        fits.push(PeriodFit {
            end,
            objective: best.value,
            evaluations,
            trace: best.trace,
            feller: feller(&params),
            max_abs_error_bp: max_abs,
        });
        warm = params;
    }

    let term_structure = TermStructure::new(v0, periods)?;
    let model_bp = reprice_bp(&term_structure, &grid, &config.inversion)?;
    let targets = grid.targets_bp();
    let errors_bp = targets
        .iter()
        .zip(&model_bp)
        .map(|(t, m)| t.iter().zip(m).map(|(t, m)| t - m).collect())
        .collect();
    let feller_flags = fits.iter().map(|f| f.feller).collect();
    Ok(CalibrationResult {
        term_structure,
        errors_bp,
        model_bp,
        periods: fits,
        feller_flags,
        warnings,
    })
}

/// Model prices of every quote (bp), rows by moneyness, columns by tenor.
pub fn reprice_bp(ts: &TermStructure, grid: &QuoteGrid, cfg: &InversionConfig) -> Result<Vec<Vec<f64>>> {
    let mut out = vec![vec![0.0; grid.tenors.len()]; grid.moneyness.len()];
    for j in 0..grid.tenors.len() {
        let quotes = grid.for_tenor(j);
        for (q, m) in quotes.iter().zip(model_prices_bp(ts, quotes, grid.base_forward, cfg)?) {
            out[q.moneyness_index][q.tenor_index] = m;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case_study;

    #[test]
    fn transform_limits_and_round_trip() {
        assert_eq!(param_transform(0.0, 2.0, 6.0, 100.0), 4.0);
        assert_eq!(param_transform(1e6, 2.0, 6.0, 100.0), 6.0);
        assert_eq!(param_transform(-1e6, 2.0, 6.0, 100.0), 2.0);
        for x in [-250.0, -1.0, 0.0, 3.0, 400.0] {
            let p = param_transform(x, 0.0, 20.0, 100.0);
            // p carries only one ulp of information about x near the edges
            assert!((param_inverse(p, 0.0, 20.0, 100.0) - x).abs() <= 1e-12 * x.abs().max(1.0), "{x}");
        }
        let grid: Vec<f64> = (-50..=50).map(|k| param_transform(k as f64 * 10.0, -1.0, 1.0, 100.0)).collect();
        assert!(grid.windows(2).all(|w| w[1] > w[0]));
        assert!(grid.iter().all(|p| *p > -1.0 && *p < 1.0));
    }

    #[test]
    fn weight_tiers() {
        let w = |m| tier_weight(m, &DEFAULT_WEIGHTS);
        assert_eq!(w(1.0), 100.0);
        assert_eq!((w(0.95), w(1.05)), (45.0, 45.0));
        assert_eq!((w(0.90), w(1.10)), (35.0, 35.0));
        assert_eq!((w(0.85), w(1.15)), (5.0, 5.0));
        assert_eq!(w(0.5), 5.0);
    }

    #[test]
    fn preprocessing_spot_checks() {
        let grid = quotes_from_surface(
            &case_study::eurostoxx_surface(),
            &case_study::eurostoxx_forwards(),
            &DEFAULT_WEIGHTS,
        )
        .unwrap();
        let atm_1y = grid.for_tenor(4)[3];
        assert!((atm_1y.adjusted_strike - 3868.64 * 4107.9 / 3892.0).abs() < 1e-9);
        assert!(!atm_1y.is_call);
        // reference values from an independent Black-Scholes implementation
        assert!((atm_1y.target_bp - 586.3414978015941).abs() < 1e-9, "{}", atm_1y.target_bp);
        let otm = grid.for_tenor(4)[0];
        assert!((otm.adjusted_strike - 3470.7575327851996).abs() < 1e-9);
        assert!((otm.target_bp - 181.57485774853245).abs() < 1e-9, "{}", otm.target_bp);
    }

    #[test]
    fn objective_units() {
        let q = Quote {
            tenor_index: 0,
            moneyness_index: 0,
            maturity: 1.0,
            moneyness: 1.0,
            adjusted_strike: 100.0,
            is_call: true,
            vol: 0.2,
            target_bp: 0.0,
            weight: 7.0,
        };
        let p = PeriodParams::driftless(1.0, 0.04, 0.3, -0.5).unwrap();
        let cfg = InversionConfig::default();
        let ts = TermStructure::flat(0.04, 1.0, p).unwrap();
        let model = model_prices_bp(&ts, &[q], 100.0, &cfg).unwrap()[0];
        let shifted = Quote { target_bp: model - 2.0, ..q };
        assert!((objective(&p, 0.04, &[], &[shifted], 100.0, &cfg) - 4.0).abs() < 1e-9);
        let exact = Quote { target_bp: model, ..q };
        assert!(objective(&p, 0.04, &[], &[exact], 100.0, &cfg) < 1e-20);
        let bad = PeriodParams { sigma: 0.0, ..p };
        assert_eq!(objective(&bad, 0.04, &[], &[q], 100.0, &cfg), PENALTY);
    }

    #[test]
    fn rejects_inconsistent_data() {
        assert!(VolSurface::new(100.0, vec![1.0], vec![1.0], vec![vec![0.2, 0.3]]).is_err());
        assert!(VolSurface::new(100.0, vec![1.0, 0.5], vec![1.0], vec![vec![0.2, 0.3]]).is_err());
        assert!(ForwardCurve::new(vec![1.0], vec![-1.0]).is_err());
        let s = VolSurface::new(100.0, vec![0.5], vec![1.0], vec![vec![0.2]]).unwrap();
        let c = ForwardCurve::new(vec![1.0], vec![100.0]).unwrap();
        assert!(matches!(quotes_from_surface(&s, &c, &DEFAULT_WEIGHTS), Err(Error::Data(_))));
        let mut b = Bounds::constrained();
        b.rho.min = -2.0;
        assert!(b.validate().is_err());
    }
}
