//! On-disk formats: labelled CSV grids, the forward curve and the
//! term-structure document.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use tdheston::calibration::ParamBound;
use tdheston::tenor::parse_year_fraction;
use tdheston::{Bounds, ForwardCurve, Period, PeriodParams, TermStructure, VolSurface};

/// A CSV table with a header row of column labels and a label in the first
/// field of every other row. Empty cells are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub corner: String,
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<Option<f64>>)>,
}

fn records(text: &str, source: &str) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            anyhow!("{source}: line {line}: {e}")
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        out.push((line, rec));
    }
    if out.is_empty() {
        bail!("{source}: file is empty");
    }
    Ok(out)
}

fn number(field: &str, source: &str, line: u64, column: usize) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| anyhow!("{source}: line {line}, column {column}: cannot parse {field:?} as a number"))?;
    if !v.is_finite() {
        bail!("{source}: line {line}, column {column}: {field:?} is not finite");
    }
    Ok(v)
}

pub fn parse_grid(text: &str, source: &str) -> Result<Grid> {
    let recs = records(text, source)?;
    let (_, header) = &recs[0];
    if header.len() < 2 {
        bail!("{source}: line 1: header needs a corner label and at least one column");
    }
    let corner = header[0].to_string();
    let columns: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut rows = Vec::with_capacity(recs.len() - 1);
    for (line, rec) in &recs[1..] {
        if rec.len() != header.len() {
            bail!(
                "{source}: line {line}: expected {} fields, found {}",
                header.len(),
                rec.len()
            );
        }
        let cells = rec
            .iter()
            .enumerate()
            .skip(1)
            .map(|(c, f)| if f.is_empty() { Ok(None) } else { number(f, source, *line, c + 1).map(Some) })
            .collect::<Result<Vec<_>>>()?;
        rows.push((rec[0].to_string(), cells));
    }
    if rows.is_empty() {
        bail!("{source}: no data rows below the header");
    }
    Ok(Grid { corner, columns, rows })
}

pub fn write_grid(grid: &Grid) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<&str> = std::iter::once(grid.corner.as_str())
        .chain(grid.columns.iter().map(String::as_str))
        .collect();
    w.write_record(&header).expect("in-memory write");
    for (label, cells) in &grid.rows {
        let fields: Vec<String> = std::iter::once(label.clone())
            .chain(cells.iter().map(|c| c.map(|v| v.to_string()).unwrap_or_default()))
            .collect();
        w.write_record(&fields).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn source_name(path: &Path) -> String {
    path.display().to_string()
}

fn label_years(labels: &[String], source: &str, what: &str) -> Result<Vec<f64>> {
    labels
        .iter()
        .enumerate()
        .map(|(c, s)| {
            parse_year_fraction(s).map_err(|e| anyhow!("{source}: {what} {} ({s:?}): {e}", c + 1))
        })
        .collect()
}

/// Label of a year fraction: whole months below a year, whole years above.
pub fn tenor_label(years: f64) -> String {
    let months = years * 12.0;
    if (years - years.round()).abs() < 1e-9 && years >= 1.0 {
        format!("{}y", years.round() as u64)
    } else if (months - months.round()).abs() < 1e-9 && months >= 1.0 {
        format!("{}m", months.round() as u64)
    } else {
        years.to_string()
    }
}

/// Moneyness rows, tenor columns, volatilities in percent.
pub fn parse_surface(text: &str, source: &str, spot: f64) -> Result<(VolSurface, Vec<String>)> {
    let grid = parse_grid(text, source)?;
    let tenors = label_years(&grid.columns, source, "tenor column")?;
    let mut moneyness = Vec::with_capacity(grid.rows.len());
    let mut vols = Vec::with_capacity(grid.rows.len());
    for (r, (label, cells)) in grid.rows.iter().enumerate() {
        let line = r + 2;
        moneyness.push(
            label
                .parse::<f64>()
                .map_err(|_| anyhow!("{source}: line {line}, column 1: cannot parse {label:?} as a moneyness"))?,
        );
        let row = cells
            .iter()
            .enumerate()
            .map(|(c, v)| v.map(|v| v / 100.0).ok_or_else(|| anyhow!("{source}: line {line}, column {}: missing volatility", c + 2)))
            .collect::<Result<Vec<_>>>()?;
        vols.push(row);
    }
    let surface = VolSurface::new(spot, tenors, moneyness, vols).with_context(|| format!("{source}: invalid surface"))?;
    Ok((surface, grid.columns))
}

pub fn load_surface(path: &Path, spot: f64) -> Result<(VolSurface, Vec<String>)> {
    parse_surface(&read_text(path)?, &source_name(path), spot)
}

pub fn write_surface(surface: &VolSurface, tenor_labels: &[String]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(std::iter::once("moneyness").chain(tenor_labels.iter().map(String::as_str)))
        .expect("in-memory write");
    for (m, row) in surface.moneyness.iter().zip(&surface.vols) {
        w.write_record(std::iter::once(m.to_string()).chain(row.iter().map(|v| percent_field(*v))))
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

/// Shortest percent string that parses back to exactly `v`.
fn percent_field(v: f64) -> String {
    (0..=17)
        .map(|p| format!("{:.p$}", v * 100.0))
        .find(|s| s.parse::<f64>().map(|x| x / 100.0) == Ok(v))
        .unwrap_or_else(|| (v * 100.0).to_string())
}

/// A header row of tenors over a single row of forwards.
pub fn parse_forwards(text: &str, source: &str) -> Result<ForwardCurve> {
    let recs = records(text, source)?;
    if recs.len() != 2 {
        bail!("{source}: expected a tenor row and a forward row, found {} rows", recs.len());
    }
    let (_, header) = &recs[0];
    let (line, values) = &recs[1];
    if header.len() != values.len() {
        bail!(
            "{source}: line {line}: expected {} fields, found {}",
            header.len(),
            values.len()
        );
    }
    let labels: Vec<String> = header.iter().map(str::to_string).collect();
    let tenors = label_years(&labels, source, "tenor column")?;
    let forwards = values
        .iter()
        .enumerate()
        .map(|(c, f)| number(f, source, *line, c + 1))
        .collect::<Result<Vec<_>>>()?;
    ForwardCurve::new(tenors, forwards).with_context(|| format!("{source}: invalid forward curve"))
}

pub fn load_forwards(path: &Path) -> Result<ForwardCurve> {
    parse_forwards(&read_text(path)?, &source_name(path))
}

pub fn write_forwards(curve: &ForwardCurve) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(curve.tenors.iter().map(|t| tenor_label(*t))).expect("in-memory write");
    w.write_record(curve.forwards.iter().map(|f| f.to_string())).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeDoc {
    pub min: f64,
    pub max: f64,
}

impl From<ParamBound> for RangeDoc {
    fn from(b: ParamBound) -> Self {
        Self { min: b.min, max: b.max }
    }
}

impl From<RangeDoc> for ParamBound {
    fn from(r: RangeDoc) -> Self {
        ParamBound::new(r.min, r.max)
    }
}

fn default_m() -> f64 {
    100.0
}

/// Search box as stored in a bounds file and in the document metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsDoc {
    #[serde(default)]
    pub name: String,
    pub v0: RangeDoc,
    pub theta: RangeDoc,
    pub kappa: RangeDoc,
    pub sigma: RangeDoc,
    pub rho: RangeDoc,
    #[serde(default = "default_m")]
    pub m: f64,
}

impl BoundsDoc {
    pub fn new(name: &str, b: &Bounds) -> Self {
        Self {
            name: name.into(),
            v0: b.v0.into(),
            theta: b.theta.into(),
            kappa: b.kappa.into(),
            sigma: b.sigma.into(),
            rho: b.rho.into(),
            m: b.m,
        }
    }

    pub fn bounds(&self) -> Bounds {
        Bounds {
            v0: self.v0.into(),
            theta: self.theta.into(),
            kappa: self.kappa.into(),
            sigma: self.sigma.into(),
            rho: self.rho.into(),
            m: self.m,
        }
    }
}

/// `constrained`, `unconstrained`, or the path of a JSON bounds file.
pub fn resolve_bounds(spec: &str) -> Result<BoundsDoc> {
    let doc = match spec {
        "constrained" => BoundsDoc::new("constrained", &Bounds::constrained()),
        "unconstrained" => BoundsDoc::new("unconstrained", &Bounds::unconstrained()),
        path => {
            let text = read_text(Path::new(path))?;
            let mut doc: BoundsDoc =
                serde_json::from_str(&text).with_context(|| format!("{path}: invalid bounds file"))?;
            if doc.name.is_empty() {
                doc.name = path.to_string();
            }
            doc
        }
    };
    doc.bounds().validate().with_context(|| format!("bounds {spec:?}"))?;
    Ok(doc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodDoc {
    pub end_tenor: String,
    pub end_years: f64,
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
    pub rho: f64,
    #[serde(default)]
    pub mu: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub bounds_used: Option<BoundsDoc>,
    #[serde(default)]
    pub weights: Vec<f64>,
    #[serde(default)]
    pub feller: Vec<bool>,
}

/// Serialized term structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureDoc {
    pub spot_or_forward_base: f64,
    pub v0: f64,
    pub periods: Vec<PeriodDoc>,
    #[serde(default)]
    pub metadata: Metadata,
}

impl StructureDoc {
    pub fn from_structure(ts: &TermStructure, base: f64, bounds: Option<BoundsDoc>, weights: &[f64]) -> Self {
        let periods: Vec<PeriodDoc> = ts
            .periods()
            .iter()
            .map(|p| PeriodDoc {
                end_tenor: tenor_label(p.end),
                end_years: p.end,
                kappa: p.params.kappa,
                theta: p.params.theta,
                sigma: p.params.sigma,
                rho: p.params.rho,
                mu: p.params.mu,
            })
            .collect();
        Self {
            spot_or_forward_base: base,
            v0: ts.v0(),
            metadata: Metadata {
                bounds_used: bounds,
                weights: weights.to_vec(),
                feller: ts.periods().iter().map(|p| p.params.feller_satisfied()).collect(),
            },
            periods,
        }
    }

    pub fn structure(&self) -> Result<TermStructure> {
        if !(self.spot_or_forward_base > 0.0) {
            bail!("spot_or_forward_base must be > 0");
        }
        let periods = self
            .periods
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let params = PeriodParams::new(p.kappa, p.theta, p.sigma, p.rho, p.mu)
                    .with_context(|| format!("period {} ({})", i + 1, p.end_tenor))?;
                Ok(Period { end: p.end_years, params })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TermStructure::new(self.v0, periods)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }
}

pub fn load_structure(path: &Path) -> Result<(StructureDoc, TermStructure)> {
    let text = read_text(path)?;
    let doc: StructureDoc = serde_json::from_str(&text).with_context(|| format!("{}: invalid term structure", path.display()))?;
    let ts = doc.structure().with_context(|| format!("{}", path.display()))?;
    Ok((doc, ts))
}

/// Comma-separated numbers, e.g. `100,45,35,5`.
pub fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|f| {
            let f = f.trim();
            f.parse::<f64>().map_err(|_| anyhow!("{what}: cannot parse {f:?} as a number"))
        })
        .collect()
}

/// Comma-separated tenors or year fractions.
pub fn parse_tenor_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|f| parse_year_fraction(f).map_err(|e| anyhow!("{what}: {e}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_round_trips() {
        let text = "moneyness,1m,3m\n0.9,20.5,19\n1,,18.25\n";
        let g = parse_grid(text, "t").unwrap();
        assert_eq!(g.rows[1].1, vec![None, Some(18.25)]);
        assert_eq!(parse_grid(&write_grid(&g), "t").unwrap(), g);
    }

    #[test]
    fn errors_carry_line_and_column() {
        let err = parse_grid("m,1m,3m\n0.9,1,2\n1.0,3,x\n", "s.csv").unwrap_err().to_string();
        assert!(err.contains("line 3, column 3"), "{err}");
        let err = parse_grid("m,1m,3m\n0.9,1\n", "s.csv").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        assert!(parse_grid("", "s.csv").unwrap_err().to_string().contains("empty"));
    }

    #[test]
    fn tenor_labels() {
        assert_eq!(tenor_label(1.0 / 12.0), "1m");
        assert_eq!(tenor_label(0.75), "9m");
        assert_eq!(tenor_label(10.0), "10y");
        assert_eq!(tenor_label(1.5), "18m");
        assert_eq!(tenor_label(0.01), "0.01");
    }

    #[test]
    fn surface_round_trips_exactly() {
        let s = tdheston::case_study::eurostoxx_surface();
        let labels: Vec<String> = tdheston::case_study::TENORS.iter().map(|t| t.to_string()).collect();
        let text = write_surface(&s, &labels);
        assert!(text.contains(",13.2,"), "{text}");
        let (back, back_labels) = parse_surface(&text, "s", s.spot).unwrap();
        assert_eq!(back, s);
        assert_eq!(back_labels, labels);
    }

    #[test]
    fn forwards_round_trip() {
        let c = parse_forwards("1m,3m,1y\n3870.6,3874.4,3892\n", "f").unwrap();
        assert_eq!(c.tenors, vec![1.0 / 12.0, 0.25, 1.0]);
        assert_eq!(parse_forwards(&write_forwards(&c), "f").unwrap(), c);
        assert!(parse_forwards("1m,3m\n3870.6\n", "f").is_err());
    }

    #[test]
    fn structure_document_round_trips() {
        let ts = tdheston::case_study::constrained_structure();
        let doc = StructureDoc::from_structure(&ts, 4107.9, Some(BoundsDoc::new("constrained", &Bounds::constrained())), &[1.0]);
        let back: StructureDoc = serde_json::from_str(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.structure().unwrap(), ts);
    }
}
