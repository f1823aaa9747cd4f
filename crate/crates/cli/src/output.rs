//! Row emission in CSV or JSON lines.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

/// Rounds to 12 significant digits so that output does not depend on the
/// last bits of a floating-point result.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn round12_opt(x: f64) -> Option<f64> {
    x.is_finite().then(|| round12(x))
}

pub fn open(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Writes all rows; JSON emits one object per line.
pub fn write_rows<T: Serialize>(w: Box<dyn Write>, format: Format, rows: &[T]) -> io::Result<()> {
    match format {
        Format::Csv => {
            let mut c = csv::Writer::from_writer(w);
            for r in rows {
                c.serialize(r).map_err(io::Error::other)?;
            }
            c.flush()
        }
        Format::Json => {
            let mut w = w;
            for r in rows {
                serde_json::to_writer(&mut w, r).map_err(io::Error::other)?;
                w.write_all(b"\n")?;
            }
            w.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round12(0.1 + 0.2), 0.3);
        assert_eq!(round12(1.0 / 3.0).to_string(), "0.333333333333");
        assert_eq!(round12(-2.5e-17), -2.5e-17);
        assert_eq!(round12_opt(f64::NAN), None);
    }
}
