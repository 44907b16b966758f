//! CSV and JSON writers.
//!
//! Floats are written in their shortest round-trip decimal form, padded with
//! trailing zeros to at least nine significant digits, so files are exact
//! and stable across platforms.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

pub const MIN_SIGNIFICANT_DIGITS: usize = 9;

/// Decimal rendering of `v`, lossless and with >= 9 significant digits.
pub fn format_float(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let mut s = format!("{v}");
    let digits = significant_digits(&s);
    if digits < MIN_SIGNIFICANT_DIGITS {
        if !s.contains('.') {
            s.push('.');
        }
        s.extend(std::iter::repeat_n('0', MIN_SIGNIFICANT_DIGITS - digits));
    }
    s
}

fn significant_digits(s: &str) -> usize {
    let body: String = s.chars().filter(char::is_ascii_digit).collect();
    let trimmed = body.trim_start_matches('0');
    if trimmed.is_empty() {
        // zero: count the single digit
        1
    } else {
        trimmed.len()
    }
}

/// A CSV cell.
pub enum Field {
    Int(u64),
    Float(f64),
    Empty,
}

impl From<u64> for Field {
    fn from(v: u64) -> Self {
        Field::Int(v)
    }
}

impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Field::Int(v as u64)
    }
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Float(v)
    }
}

/// In-memory CSV with `\n` line endings.
pub struct CsvBuilder {
    columns: usize,
    text: String,
}

impl CsvBuilder {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let text = header.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(",") + "\n";
        Self { columns: header.len(), text }
    }

    pub fn row(&mut self, fields: Vec<Field>) {
        debug_assert_eq!(fields.len(), self.columns);
        for (i, f) in fields.into_iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            match f {
                Field::Int(v) => write!(self.text, "{v}").expect("write to String"),
                Field::Float(v) => self.text.push_str(&format_float(v)),
                Field::Empty => {}
            }
        }
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.text)
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn float_examples() {
        assert_eq!(format_float(0.5), "0.500000000");
        assert_eq!(format_float(20.0), "20.0000000");
        assert_eq!(format_float(0.0), "0.00000000");
        assert_eq!(format_float(-1.25), "-1.25000000");
        assert_eq!(format_float(0.1 + 0.2), "0.30000000000000004");
        assert_eq!(format_float(0.000123), "0.000123000000");
        assert_eq!(format_float(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_layout() {
        let mut csv = CsvBuilder::new(&["t", "value", "extra"]);
        csv.row(vec![1u64.into(), 2.5.into(), Field::Empty]);
        assert_eq!(csv.as_str(), "t,value,extra\n1,2.50000000,\n");
    }

    proptest! {
        #[test]
        fn round_trips_exactly(v in -1e12..1e12f64) {
            let s = format_float(v);
            prop_assert_eq!(s.parse::<f64>().unwrap(), v);
            prop_assert!(significant_digits(&s) >= MIN_SIGNIFICANT_DIGITS || v == 0.0);
        }
    }
}
