//! Input weights: JSON numbers, decimal strings or exact rationals `"p/q"`.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Weight {
    Num(f64),
    Text(String),
}

impl Weight {
    pub fn rational(p: i64, q: i64) -> Self {
        let r = Ratio::new(p, q);
        if *r.denom() == 1 {
            Weight::Text(r.numer().to_string())
        } else {
            Weight::Text(format!("{}/{}", r.numer(), r.denom()))
        }
    }

    /// Converts once to `f64`; rejects non-finite and non-positive values.
    pub fn value(&self) -> Result<f64> {
        let v = match self {
            Weight::Num(x) => *x,
            Weight::Text(s) => parse_weight(s)?,
        };
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::SupportMismatch(format!("weight {self} is not strictly positive")));
        }
        Ok(v)
    }
}

impl From<f64> for Weight {
    fn from(x: f64) -> Self {
        Weight::Num(x)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Num(x) => write!(f, "{x}"),
            Weight::Text(s) => write!(f, "{s}"),
        }
    }
}

pub fn parse_weight(s: &str) -> Result<f64> {
    let t = s.trim();
    if t.contains('/') {
        let r = Ratio::<i64>::from_str(t).map_err(|e| Error::ParseError(format!("weight `{t}`: {e}")))?;
        Ok(*r.numer() as f64 / *r.denom() as f64)
    } else {
        t.parse::<f64>().map_err(|e| Error::ParseError(format!("weight `{t}`: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_and_decimals() {
        assert_eq!(parse_weight("3/4").unwrap(), 0.75);
        assert_eq!(parse_weight(" 2.5 ").unwrap(), 2.5);
        assert_eq!(Weight::rational(4, 2), Weight::Text("2".into()));
        assert!(parse_weight("1/0").is_err());
        assert!(Weight::Text("-1".into()).value().is_err());
    }

    #[test]
    fn untagged_json() {
        let w: Vec<Weight> = serde_json::from_str(r#"[1.5, "2/3"]"#).unwrap();
        assert_eq!(w[0].value().unwrap(), 1.5);
        assert!((w[1].value().unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }
}
