//! Text forms shared by the library and the command line: exact rationals as
//! `p/q` strings, 15-digit decimals, and small CSV/JSON writers.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::Rational;

/// `"p/q"`, or `"p"` when the denominator is 1.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("{s:?} is not a rational p/q"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

/// Decimal with 15 significant digits in scientific notation, e.g. `6.06530659712633e-1`.
pub fn format_decimal(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    format!("{v:.14e}")
}

/// Same, for an exact value too large or small for `f64`.
pub fn format_rational_decimal(q: &Rational) -> String {
    if num_traits::Zero::is_zero(q) {
        return "0".into();
    }
    let r = crate::real::rational_to_rug(q);
    let f = rug::Float::with_val(64, &r);
    if f.to_f64().is_finite() && f.to_f64() != 0.0 {
        format_decimal(f.to_f64())
    } else {
        f.to_string_radix(10, Some(15))
    }
}

/// Minimal CSV table with a header row, comma separators and LF endings.
#[derive(Clone, Debug, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Trailing `# key,value` lines.
    pub footer: Vec<(String, String)>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        CsvTable { header: header.into_iter().map(Into::into).collect(), ..Default::default() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn footer(&mut self, key: &str, value: impl Into<String>) {
        self.footer.push((key.into(), value.into()));
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.header.join(","));
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.join(","));
        }
        for (k, v) in &self.footer {
            let _ = writeln!(out, "# {k},{v}");
        }
        out
    }

    /// `{"columns": [...], "footer": {...}, "rows": [{col: val}]}`, keys sorted.
    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let m: serde_json::Map<_, _> = self
                    .header
                    .iter()
                    .cloned()
                    .zip(r.iter().map(|v| serde_json::Value::String(v.clone())))
                    .collect();
                serde_json::Value::Object(m)
            })
            .collect();
        let footer: serde_json::Map<_, _> = self
            .footer
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect();
        let doc = serde_json::json!({ "columns": self.header, "rows": rows, "footer": footer });
        let mut s = serde_json::to_string_pretty(&doc).expect("plain document serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    #[test]
    fn rational_strings_round_trip() {
        for q in [rat(1, 2), rat(-1, 3), rat(4, 1), rat(0, 1)] {
            assert_eq!(parse_rational(&format_rational(&q)).unwrap(), q);
        }
        assert_eq!(format_rational(&rat(-2, 6)), "-1/3");
        assert_eq!(parse_rational(" 6 / 4 ").unwrap(), rat(3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("0.5").is_err());
    }

    #[test]
    fn decimals() {
        assert_eq!(format_decimal(0.5), "5.00000000000000e-1");
        assert_eq!(format_rational_decimal(&rat(2, 3)), "6.66666666666667e-1");
        let tiny = Rational::new(BigInt::one(), BigInt::from(10).pow(400));
        assert!(format_rational_decimal(&tiny).contains("e-400"));
    }

    #[test]
    fn csv_layout() {
        let mut t = CsvTable::new(["L", "rho"]);
        t.push(vec!["1".into(), "1/2".into()]);
        t.footer("sum", "1");
        assert_eq!(t.to_csv(), "L,rho\n1,1/2\n# sum,1\n");
        let j = t.to_json();
        assert!(j.find("\"columns\"").unwrap() < j.find("\"footer\"").unwrap());
    }
}
