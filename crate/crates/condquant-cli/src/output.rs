//! Serialisable output shapes: exact rationals, tagged floats, the report
//! envelope and CSV tables.

use condquant::rational::{to_f64, to_sci};
use condquant::Rational;
use serde::Serialize;
use std::io;
use std::path::Path;

/// Significant digits in `decimal` renderings, overridable through
/// `CONDQUANT_PRECISION`.
pub const DEFAULT_PRECISION: usize = 50;

pub fn precision() -> usize {
    std::env::var("CONDQUANT_PRECISION")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&p| (1..=10_000).contains(&p))
        .unwrap_or(DEFAULT_PRECISION)
}

/// An exact rational as decimal-string numerator and denominator, with the
/// nearest double and a correctly rounded decimal at the configured precision.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RationalJson {
    pub num: String,
    pub den: String,
    pub approx: f64,
    pub decimal: String,
}

impl RationalJson {
    pub fn new(r: &Rational) -> Self {
        RationalJson {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
            approx: to_f64(r),
            decimal: to_sci(r, precision()),
        }
    }
}

/// A floating-point result, tagged so it is never mistaken for an exact value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FloatJson {
    pub float: f64,
}

impl FloatJson {
    pub fn new(x: f64) -> Self {
        FloatJson { float: x }
    }
}

/// Lower/upper pair of exact values.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntervalJson {
    pub lower: RationalJson,
    pub upper: RationalJson,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FloatIntervalJson {
    pub lower: FloatJson,
    pub upper: FloatJson,
}

/// Top-level JSON document every command prints.
#[derive(Debug, Serialize)]
pub struct Envelope<P: Serialize, R: Serialize> {
    pub command: &'static str,
    pub preset: &'static str,
    pub parameters: P,
    pub results: R,
    pub version: &'static str,
    pub seed: Option<u64>,
}

impl<P: Serialize, R: Serialize> Envelope<P, R> {
    pub fn new(command: &'static str, preset: &'static str, parameters: P, results: R, seed: Option<u64>) -> Self {
        Envelope { command, preset, parameters, results, version: env!("CARGO_PKG_VERSION"), seed }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// One row of the plotting table: `n, V_n, d_n, coeff`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesCsvRow {
    pub n: String,
    #[serde(rename = "V_n")]
    pub v_n: String,
    pub d_n: f64,
    pub coeff: f64,
}

/// Digits of `V_n` in CSV tables.
pub const CSV_DIGITS: usize = 30;

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use condquant::rational::rat;

    #[test]
    fn rational_fields() {
        let j = RationalJson::new(&rat(-86696, 777231));
        assert_eq!(j.num, "-86696");
        assert_eq!(j.den, "777231");
        assert_eq!(j.approx, -86696.0 / 777231.0);
        assert!(j.decimal.starts_with("-1.1154"));
    }

    #[test]
    fn envelope_is_stable() {
        let e = Envelope::new("x", "uniform", 1u8, vec![RationalJson::new(&rat(1, 3))], Some(4));
        assert_eq!(e.to_json(), e.to_json());
        let v: serde_json::Value = serde_json::from_str(&e.to_json()).unwrap();
        assert_eq!(v["results"][0]["den"], "3");
        assert_eq!(v["seed"], 4);
    }
}
