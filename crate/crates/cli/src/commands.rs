//! Subcommands. Each builds all of its output in memory before touching the
//! output directory, so a failed run leaves no files behind.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use tdheston::calibration::{quotes_from_surface, reprice_bp, DEFAULT_WEIGHTS};
use tdheston::forward_start::forward_start_prices;
use tdheston::tenor::parse_year_fraction;
use tdheston::transform_pricing::vanilla_prices;
use tdheston::{
    bootstrap_calibrate, forward_skew, implied_vol, marginal_cf, mc_vanilla_price, CalibrationConfig, InversionConfig,
    McConfig, Scheme, TermStructure, VanillaSpec,
};

use crate::io::{self, Grid, StructureDoc};

const BP: f64 = 1e4;

#[derive(Debug, Parser)]
#[command(name = "tdheston", version, about = "Heston model with piecewise-constant parameters")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Cap on worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Absolute tolerance of the Fourier inversion.
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bootstrap a term structure from a volatility surface.
    Calibrate(CalibrateArgs),
    /// Price vanilla or forward-start options.
    Price(PriceArgs),
    /// Implied-volatility surface of forward-start options.
    ForwardSkew(SkewArgs),
    /// Feller, normalization and martingale diagnostics.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Moneyness rows, tenor columns, volatilities in percent.
    #[arg(long)]
    pub surface: PathBuf,
    /// Tenor header row over a row of forwards.
    #[arg(long)]
    pub forwards: PathBuf,
    /// Spot the moneyness refers to.
    #[arg(long)]
    pub spot: f64,
    /// `constrained`, `unconstrained` or a JSON bounds file.
    #[arg(long, default_value = "constrained")]
    pub bounds: String,
    /// Weights by distance from the money, ATM first.
    #[arg(long, default_value = "100,45,35,5")]
    pub weights: String,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Jittered restarts per period.
    #[arg(long, default_value_t = 2)]
    pub restarts: usize,
    /// Warn about periods whose largest error exceeds this (bp).
    #[arg(long, default_value_t = 10.0)]
    pub max_error_bp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Product {
    Vanilla,
    ForwardStart,
}

#[derive(Debug, Args)]
pub struct PriceArgs {
    /// Term-structure document.
    #[arg(long)]
    pub structure: PathBuf,
    #[arg(long, value_enum, default_value = "vanilla")]
    pub product: Product,
    /// Absolute strike (vanilla).
    #[arg(long)]
    pub strike: Option<f64>,
    /// Strike as a multiple of the starting level (vanilla) or of the fixing
    /// (forward start).
    #[arg(long)]
    pub moneyness: Option<f64>,
    /// Expiry, e.g. `1y`, `9m` or `0.5`.
    #[arg(long)]
    pub maturity: Option<String>,
    /// Strike fixing date of a forward-start option.
    #[arg(long, default_value = "0")]
    pub fix: String,
    #[arg(long)]
    pub put: bool,
    #[arg(long, default_value_t = 1.0)]
    pub discount: f64,
    /// Starting level; defaults to the document's base.
    #[arg(long)]
    pub level: Option<f64>,
    /// Extend the last period beyond the horizon instead of failing.
    #[arg(long)]
    pub extend: bool,
    /// Batch mode: price every quote of this surface.
    #[arg(long, requires_all = ["forwards", "spot"])]
    pub surface: Option<PathBuf>,
    #[arg(long)]
    pub forwards: Option<PathBuf>,
    #[arg(long)]
    pub spot: Option<f64>,
    /// Also write the results to this CSV file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SkewArgs {
    #[arg(long)]
    pub structure: PathBuf,
    /// Life of the option after its strike is fixed.
    #[arg(long, default_value = "3m")]
    pub tenor: String,
    #[arg(long, default_value = "0,3m,6m,9m,1y,2y")]
    pub terms: String,
    #[arg(long, default_value = "0.85,0.9,0.95,1,1.05,1.1,1.15")]
    pub moneyness: String,
    /// Second structure: write its price difference (bp) instead of vols.
    #[arg(long)]
    pub diff: Option<PathBuf>,
    #[arg(long)]
    pub extend: bool,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    FullTruncation,
    Absorbing,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub structure: PathBuf,
    /// Maturities to test; defaults to the period ends.
    #[arg(long)]
    pub maturities: Option<String>,
    /// Compare at-the-money prices with Monte Carlo.
    #[arg(long)]
    pub mc: bool,
    #[arg(long, default_value_t = 100_000)]
    pub mc_paths: usize,
    #[arg(long, default_value_t = 1.0 / 365.0)]
    pub mc_dt: f64,
    #[arg(long, value_enum, default_value = "full-truncation")]
    pub scheme: SchemeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Output of a run: text for standard output and files to create.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub files: Vec<(PathBuf, String)>,
}

impl Outcome {
    pub fn commit(&self) -> Result<()> {
        for (path, content) in &self.files {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            }
            std::fs::write(path, content).with_context(|| format!("cannot write {}", path.display()))?;
        }
        Ok(())
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let mut inversion = InversionConfig::default();
    if let Some(tol) = cli.abs_tol {
        inversion = inversion.with_abs_tol(tol);
    }
    inversion.validate()?;
    match &cli.command {
        Command::Calibrate(a) => calibrate(a, &inversion),
        Command::Price(a) => price(a, &inversion),
        Command::ForwardSkew(a) => skew(a, &inversion),
        Command::Check(a) => check(a, &inversion),
    }
}

fn moneyness_grid(corner: &str, columns: &[String], moneyness: &[f64], values: &[Vec<f64>]) -> Grid {
    Grid {
        corner: corner.into(),
        columns: columns.to_vec(),
        rows: moneyness
            .iter()
            .zip(values)
            .map(|(m, row)| (m.to_string(), row.iter().map(|v| Some(*v)).collect()))
            .collect(),
    }
}

fn calibrate(a: &CalibrateArgs, inversion: &InversionConfig) -> Result<Outcome> {
    let (surface, labels) = io::load_surface(&a.surface, a.spot)?;
    let curve = io::load_forwards(&a.forwards)?;
    let bounds = io::resolve_bounds(&a.bounds)?;
    let weights = io::parse_list(&a.weights, "--weights")?;
    let config = CalibrationConfig {
        inversion: *inversion,
        restarts: a.restarts,
        seed: a.seed,
        max_error_bp: Some(a.max_error_bp),
        ..CalibrationConfig::default()
    };
    let r = bootstrap_calibrate(&surface, &curve, &bounds.bounds(), &weights, &config)?;
    let doc = StructureDoc::from_structure(&r.term_structure, curve.base(), Some(bounds.clone()), &weights);

    let mut out = Outcome::default();
    let s = &mut out.stdout;
    writeln!(s, "bounds: {}", bounds.name)?;
    writeln!(s, "base forward: {}", curve.base())?;
    writeln!(s, "v0: {:.6}", r.term_structure.v0())?;
    writeln!(
        s,
        "{:>6} {:>9} {:>9} {:>9} {:>9} {:>7} {:>12} {:>10}",
        "period", "theta", "kappa", "sigma", "rho", "feller", "objective", "max|err|"
    )?;
    for (p, fit) in r.term_structure.periods().iter().zip(&r.periods) {
        writeln!(
            s,
            "{:>6} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>7} {:>12.4e} {:>10.2}",
            io::tenor_label(p.end),
            p.params.theta,
            p.params.kappa,
            p.params.sigma,
            p.params.rho,
            if fit.feller { "yes" } else { "no" },
            fit.objective,
            fit.max_abs_error_bp
        )?;
    }
    let worst = r.errors_bp.iter().flatten().fold(0.0f64, |m, e| m.max(e.abs()));
    writeln!(s, "max |market - model|: {worst:.2} bp")?;
    for w in &r.warnings {
        writeln!(s, "warning: {w}")?;
    }
    let summary = out.stdout.clone();
    out.files = vec![
        (a.out_dir.join("term_structure.json"), doc.to_json()),
        (
            a.out_dir.join("errors.csv"),
            io::write_grid(&moneyness_grid("moneyness", &labels, &surface.moneyness, &r.errors_bp)),
        ),
        (a.out_dir.join("summary.txt"), summary),
    ];
    Ok(out)
}

fn horizon_structure(ts: &TermStructure, t: f64, extend: bool) -> Result<TermStructure> {
    if t > ts.horizon() {
        if !extend {
            bail!(
                "maturity {t} is beyond the horizon {} of the structure (pass --extend to reuse the last period)",
                ts.horizon()
            );
        }
        return Ok(ts.extended_to(t));
    }
    Ok(ts.clone())
}

fn vol_field(v: std::result::Result<f64, String>) -> String {
    match v {
        Ok(v) => format!("{v:.6}"),
        Err(e) => format!("n/a ({e})"),
    }
}

fn price(a: &PriceArgs, inversion: &InversionConfig) -> Result<Outcome> {
    let (doc, ts) = io::load_structure(&a.structure)?;
    if let Some(surface) = &a.surface {
        return price_batch(a, surface, &doc, &ts, inversion);
    }
    let level = a.level.unwrap_or(doc.spot_or_forward_base);
    if !(level > 0.0) {
        bail!("--level must be > 0");
    }
    let x0 = level.ln();
    let Some(maturity) = &a.maturity else {
        bail!("--maturity is required unless --surface is given");
    };
    let t = parse_year_fraction(maturity)?;
    let ts = horizon_structure(&ts, t, a.extend)?;
    let is_call = !a.put;
    let base = doc.spot_or_forward_base;
    let header = "product,fix,maturity,strike,type,price,price_bp,implied_vol";
    let line = match a.product {
        Product::Vanilla => {
            let strike = match (a.strike, a.moneyness) {
                (Some(k), None) => k,
                (None, Some(m)) => m * level,
                _ => bail!("give exactly one of --strike and --moneyness"),
            };
            let p = vanilla_prices(&ts, t, a.discount, &[(strike, is_call)], x0, inversion)?[0];
            let fwd = marginal_cf(&ts, t, Complex64::new(0.0, -1.0), x0, None)?.re;
            let iv = implied_vol(p, fwd, strike, t, a.discount, is_call).map_err(|e| e.to_string());
            format!(
                "vanilla,0,{t},{strike},{},{p},{},{}",
                if is_call { "call" } else { "put" },
                p / base * BP,
                vol_field(iv)
            )
        }
        Product::ForwardStart => {
            if a.strike.is_some() {
                bail!("forward-start strikes are ratios; use --moneyness");
            }
            let k = a.moneyness.unwrap_or(1.0);
            let t_u = parse_year_fraction(&a.fix)?;
            let (prices, fwd_u, ratio) = forward_start_prices(&ts, t_u, t, a.discount, &[(k, is_call)], x0, inversion)?;
            let p = prices[0];
            let iv = implied_vol(p / fwd_u, ratio, k, t - t_u, a.discount, is_call).map_err(|e| e.to_string());
            format!(
                "forward-start,{t_u},{t},{k},{},{p},{},{}",
                if is_call { "call" } else { "put" },
                p / base * BP,
                vol_field(iv)
            )
        }
    };
    let mut out = Outcome {
        stdout: format!("{header}\n{line}\n"),
        files: Vec::new(),
    };
    if let Some(path) = &a.out {
        out.files.push((path.clone(), out.stdout.clone()));
    }
    Ok(out)
}

/// Prices every quote of a surface in bp of the base forward.
fn price_batch(
    a: &PriceArgs,
    surface_path: &Path,
    doc: &StructureDoc,
    ts: &TermStructure,
    inversion: &InversionConfig,
) -> Result<Outcome> {
    let spot = a.spot.context("--spot is required with --surface")?;
    let forwards = a.forwards.as_ref().context("--forwards is required with --surface")?;
    let (surface, labels) = io::load_surface(surface_path, spot)?;
    let curve = io::load_forwards(forwards)?;
    let grid = quotes_from_surface(&surface, &curve, &DEFAULT_WEIGHTS)?;
    if (grid.base_forward - doc.spot_or_forward_base).abs() > 1e-9 * grid.base_forward {
        log::warn!(
            "structure base {} differs from the curve's base forward {}; pricing from the curve",
            doc.spot_or_forward_base,
            grid.base_forward
        );
    }
    let last = *surface.tenors.last().expect("non-empty surface");
    let ts = horizon_structure(ts, last, a.extend)?;
    let model = reprice_bp(&ts, &grid, inversion)?;
    let text = io::write_grid(&moneyness_grid("moneyness", &labels, &surface.moneyness, &model));
    let mut out = Outcome {
        stdout: text.clone(),
        files: Vec::new(),
    };
    if let Some(path) = &a.out {
        out.files.push((path.clone(), text));
    }
    Ok(out)
}

fn skew(a: &SkewArgs, inversion: &InversionConfig) -> Result<Outcome> {
    let (doc, ts) = io::load_structure(&a.structure)?;
    let tenor = parse_year_fraction(&a.tenor)?;
    let terms = io::parse_tenor_list(&a.terms, "--terms")?;
    let moneyness = io::parse_list(&a.moneyness, "--moneyness")?;
    let last = terms.iter().fold(0.0f64, |m, t| m.max(*t)) + tenor;
    let x0 = doc.spot_or_forward_base.ln();
    let columns: Vec<String> = moneyness.iter().map(|m| m.to_string()).collect();
    let term_labels: Vec<String> = terms.iter().map(|t| if *t == 0.0 { "0".into() } else { io::tenor_label(*t) }).collect();

    let surface = forward_skew(&horizon_structure(&ts, last, a.extend)?, tenor, &terms, &moneyness, x0, inversion)?;
    let (grid, name) = if let Some(other) = &a.diff {
        let (other_doc, other_ts) = io::load_structure(other)?;
        if (other_doc.spot_or_forward_base - doc.spot_or_forward_base).abs() > 1e-9 * doc.spot_or_forward_base {
            bail!("the two structures have different bases");
        }
        let second = forward_skew(&horizon_structure(&other_ts, last, a.extend)?, tenor, &terms, &moneyness, x0, inversion)?;
        let base = doc.spot_or_forward_base;
        let rows = term_labels
            .iter()
            .zip(surface.prices.iter().zip(&second.prices))
            .map(|(l, (p, q))| (l.clone(), p.iter().zip(q).map(|(p, q)| Some((p - q) / base * BP)).collect()))
            .collect();
        (Grid { corner: "forward_term".into(), columns, rows }, "skew_diff.csv")
    } else {
        let missing = surface.vols.iter().flatten().filter(|v| v.is_none()).count();
        if missing > 0 {
            log::warn!("{missing} cells have no implied volatility and are left empty");
        }
        let rows = term_labels
            .iter()
            .zip(&surface.vols)
            .map(|(l, row)| (l.clone(), row.iter().map(|v| v.map(|v| v * 100.0)).collect()))
            .collect();
        (Grid { corner: "forward_term".into(), columns, rows }, "skew.csv")
    };
    let text = io::write_grid(&grid);
    Ok(Outcome {
        stdout: text.clone(),
        files: vec![(a.out_dir.join(name), text)],
    })
}

fn check(a: &CheckArgs, inversion: &InversionConfig) -> Result<Outcome> {
    let (doc, ts) = io::load_structure(&a.structure)?;
    let x0 = doc.spot_or_forward_base.ln();
    let maturities = match &a.maturities {
        Some(s) => io::parse_tenor_list(s, "--maturities")?,
        None => ts.periods().iter().map(|p| p.end).collect(),
    };
    let mut s = String::new();
    writeln!(s, "feller (2 kappa theta - sigma^2):")?;
    for p in ts.periods() {
        let q = &p.params;
        let margin = 2.0 * q.kappa * q.theta - q.sigma * q.sigma;
        writeln!(
            s,
            "  {:>6} {:+.6} {}",
            io::tenor_label(p.end),
            margin,
            if q.feller_satisfied() { "satisfied" } else { "violated" }
        )?;
    }
    writeln!(s, "maturity,|phi(0)-1|,|phi(-i)/forward-1|")?;
    for &t in &maturities {
        let res = (|| -> tdheston::Result<(f64, f64)> {
            let one = marginal_cf(&ts, t, Complex64::new(0.0, 0.0), x0, None)?;
            let fwd = marginal_cf(&ts, t, Complex64::new(0.0, -1.0), x0, None)?;
            Ok(((one - 1.0).norm(), (fwd / (x0 + drift(&ts, t)).exp() - 1.0).norm()))
        })();
        match res {
            Ok((n, m)) => writeln!(s, "{t},{n:.3e},{m:.3e}")?,
            Err(e) => writeln!(s, "{t},n/a ({e}),n/a")?,
        }
    }
    if a.mc {
        let cfg = McConfig {
            n_paths: a.mc_paths,
            dt: a.mc_dt,
            scheme: match a.scheme {
                SchemeArg::FullTruncation => Scheme::FullTruncation,
                SchemeArg::Absorbing => Scheme::Absorbing,
            },
            seed: a.seed,
            antithetic: false,
        };
        cfg.validate()?;
        writeln!(s, "maturity,strike,analytic,mc,std_error,z")?;
        for &t in &maturities {
            let strike = doc.spot_or_forward_base * drift(&ts, t).exp();
            let spec = VanillaSpec::undiscounted(strike, t, true);
            let res = vanilla_prices(&ts, t, 1.0, &[(strike, true)], x0, inversion)
                .and_then(|p| Ok((p[0], mc_vanilla_price(&ts, &spec, x0, &cfg)?)));
            match res {
                Ok((p, mc)) => writeln!(
                    s,
                    "{t},{strike},{p},{},{},{:+.2}",
                    mc.mean,
                    mc.std_error,
                    (mc.mean - p) / mc.std_error
                )?,
                Err(e) => writeln!(s, "{t},{strike},n/a ({e}),,,")?,
            }
        }
    }
    Ok(Outcome {
        stdout: s,
        files: Vec::new(),
    })
}

/// `integral of mu` over `[0, t]`.
fn drift(ts: &TermStructure, t: f64) -> f64 {
    let mut start = 0.0;
    let mut total = 0.0;
    for p in ts.periods() {
        let end = p.end.min(t);
        if end > start {
            total += p.params.mu * (end - start);
        }
        start = p.end;
    }
    total
}
