//! Config-file values merged under command-line flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

/// A list of reals written either as `a,b,c` or as an inclusive linear
/// grid `lo:hi:n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad number '{t}': {e}"));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [lo, hi, n] => {
                let (lo, hi) = (num(lo)?, num(hi)?);
                let n: usize = n.trim().parse().map_err(|e| format!("bad count '{n}': {e}"))?;
                if n == 0 {
                    return Err("grid needs at least one point".into());
                }
                if n == 1 {
                    return Ok(Grid(vec![lo]));
                }
                Ok(Grid((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()))
            }
            [_] => s.split(',').filter(|t| !t.trim().is_empty()).map(num).collect::<Result<_, _>>().map(Grid),
            _ => Err(format!("expected 'lo:hi:n' or a comma list, got '{s}'")),
        }
    }
}

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            List(Vec<f64>),
            One(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::List(v) => Ok(Grid(v)),
            Raw::One(x) => Ok(Grid(vec![x])),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Every key a config file may set. Keys are the long flag names.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub jobs: Option<usize>,
    pub tol_abs: Option<f64>,
    pub tol_rel: Option<f64>,
    pub tmax: Option<f64>,
    pub strict: Option<bool>,
    pub trace: Option<PathBuf>,
    pub no_timing: Option<bool>,
    pub family: Option<String>,
    pub param: Option<Grid>,
    pub e: Option<Grid>,
    pub delta_max: Option<f64>,
    pub cells: Option<usize>,
    pub j_max: Option<usize>,
    pub width: Option<f64>,
    pub level: Option<String>,
    pub criteria: Option<Vec<u8>>,
}

macro_rules! fieldwise_or {
    ($a:ident, $b:ident; $($f:ident),*) => {
        Settings { $($f: $a.$f.or($b.$f)),* }
    };
}

impl Settings {
    /// Field-wise: values set here win over `other`.
    pub fn or(self, other: Settings) -> Settings {
        fieldwise_or!(self, other; out, format, jobs, tol_abs, tol_rel, tmax, strict, trace, no_timing,
            family, param, e, delta_max, cells, j_max, width, level, criteria)
    }

    /// Top-level keys, overridden by the `[command]` section.
    pub fn load(path: &Path, command: &str) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let table: toml::Table = text.parse().map_err(|e| format!("{}: {e}", path.display()))?;
        let mut global = toml::Table::new();
        let mut section = toml::Table::new();
        for (k, v) in table {
            match v {
                toml::Value::Table(t) if k == command => section = t,
                toml::Value::Table(_) => {}
                other => {
                    global.insert(k, other);
                }
            }
        }
        global.extend(section);
        toml::Value::Table(global)
            .try_into()
            .map_err(|e| format!("{}: {e}", path.display()))
    }
}
