use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A maturity label such as `1m`, `3m` or `10y`.
///
/// Months convert as `n / 12` and years as `n`; no day count is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tenor {
    Months(u32),
    Years(u32),
}

impl Tenor {
    pub fn years(&self) -> f64 {
        match *self {
            Tenor::Months(m) => m as f64 / 12.0,
            Tenor::Years(y) => y as f64,
        }
    }
}

impl FromStr for Tenor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Data(format!("unrecognised tenor {s:?} (expected <int>m or <int>y)"));
        if s.len() < 2 {
            return Err(bad());
        }
        let (num, unit) = s.split_at(s.len() - 1);
        let n: u32 = num.parse().map_err(|_| bad())?;
        match unit {
            "m" | "M" => Ok(Tenor::Months(n)),
            "y" | "Y" => Ok(Tenor::Years(n)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Tenor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tenor::Months(m) => write!(f, "{m}m"),
            Tenor::Years(y) => write!(f, "{y}y"),
        }
    }
}

/// Parses a tenor label, or a plain year fraction such as `0.25`.
pub fn parse_year_fraction(s: &str) -> Result<f64> {
    match s.trim().parse::<Tenor>() {
        Ok(t) => Ok(t.years()),
        Err(e) => s.trim().parse::<f64>().map_err(|_| e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_displays() {
        let t: Tenor = "3m".parse().unwrap();
        assert_eq!(t, Tenor::Months(3));
        assert_eq!(t.years(), 0.25);
        assert_eq!("10y".parse::<Tenor>().unwrap().years(), 10.0);
        assert_eq!(Tenor::Years(2).to_string(), "2y");
        assert!("y".parse::<Tenor>().is_err());
        assert!("3w".parse::<Tenor>().is_err());
        assert!("-1m".parse::<Tenor>().is_err());
    }

    #[test]
    fn year_fraction_accepts_numbers() {
        assert_eq!(parse_year_fraction("0.5").unwrap(), 0.5);
        assert_eq!(parse_year_fraction("9m").unwrap(), 0.75);
        assert!(parse_year_fraction("soon").is_err());
    }
}
