//! Plain-text impedance tables.
//!
//! ```text
//! # period = 0.011394
//! # any other comment
//! 0.0, 376.73, 0.0
//! 0.0011394, 350.1, -20.5
//! ```
//!
//! Rows are `y_meters, Re(Z)_ohms, Im(Z)_ohms`. The `# period = ...` header is required.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use super::{load_tabulated, ImpedanceProfile};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ImpedanceTable {
    pub period: f64,
    pub samples: Vec<(f64, Complex64)>,
}

fn parse_period(comment: &str) -> Option<&str> {
    let (key, value) = comment.split_once('=')?;
    (key.trim() == "period").then(|| value.trim())
}

pub fn parse_table(text: &str) -> Result<ImpedanceTable> {
    let mut period = None;
    let mut samples = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(value) = parse_period(comment) {
                let d: f64 = value
                    .parse()
                    .map_err(|_| Error::MalformedTable(format!("line {line_no}: bad period '{value}'")))?;
                if period.replace(d).is_some() {
                    return Err(Error::MalformedTable(format!("line {line_no}: period declared twice")));
                }
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::MalformedTable(format!(
                "line {line_no}: expected 3 comma-separated fields, got {}",
                fields.len()
            )));
        }
        let mut values = [0.0; 3];
        for (slot, field) in values.iter_mut().zip(&fields) {
            *slot = field
                .parse()
                .map_err(|_| Error::MalformedTable(format!("line {line_no}: bad number '{field}'")))?;
        }
        samples.push((values[0], Complex64::new(values[1], values[2])));
    }
    let period = period.ok_or_else(|| Error::MalformedTable("missing '# period = <meters>' header".into()))?;
    Ok(ImpedanceTable { period, samples })
}

pub fn read_profile(path: &Path) -> Result<ImpedanceProfile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::MalformedTable(format!("{}: {e}", path.display())))?;
    let table = parse_table(&text)?;
    load_tabulated(table.period, table.samples)
}

/// Serializes samples in the table format. `comments` become extra `#` lines
/// after the period header. Values use round-trip precision.
pub fn format_table(period: f64, samples: &[(f64, Complex64)], comments: &[String]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# period = {period:e}");
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    let _ = writeln!(out, "# y_m, re_ohm, im_ohm");
    for (y, z) in samples {
        let _ = writeln!(out, "{y:e}, {:e}, {:e}", z.re, z.im);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_header_comments_and_rows() {
        let text = "# generated\n# period = 0.5\n\n0.0, 1.0, -2.0\n  0.25 ,3,4\n";
        let t = parse_table(text).unwrap();
        assert_eq!(t.period, 0.5);
        assert_eq!(t.samples, vec![(0.0, Complex64::new(1.0, -2.0)), (0.25, Complex64::new(3.0, 4.0))]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_table("0, 1, 2\n"), Err(Error::MalformedTable(_))));
        assert!(matches!(parse_table("# period = x\n"), Err(Error::MalformedTable(_))));
        assert!(matches!(parse_table("# period = 1\n0, 1\n"), Err(Error::MalformedTable(_))));
        assert!(matches!(parse_table("# period = 1\n0, a, 1\n"), Err(Error::MalformedTable(_))));
        assert!(matches!(
            parse_table("# period = 1\n# period = 2\n"),
            Err(Error::MalformedTable(_))
        ));
        let err = parse_table("# period = 1\n0, 1, 2\n0.5, 1\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn format_round_trips_bitwise() {
        let samples = vec![
            (0.0, Complex64::new(376.730_313_668_1, -1e-300)),
            (0.1 / 3.0, Complex64::new(-0.1, std::f64::consts::PI)),
        ];
        let text = format_table(0.1, &samples, &["hello".into()]);
        let t = parse_table(&text).unwrap();
        assert_eq!(t.period, 0.1);
        assert_eq!(t.samples, samples);
    }
}
