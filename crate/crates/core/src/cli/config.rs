//! Flat `key = value` run configuration.
//!
//! One pair per line, `#` starts a comment, blank lines are ignored.
//! Unknown and repeated keys are rejected. Rates are linear frequencies in
//! GHz and times are in ns.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::{Route, SweepAxis};
use crate::error::{Error, Result};
use crate::model::{ghz, SystemParams};
use crate::numeric::IntegrationConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!(
                "`format` must be csv or json, got `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

pub const KEYS: &[&str] = &[
    "g0_ghz",
    "kappa_ghz",
    "gamma_ghz",
    "delta_ghz",
    "gamma0_ghz",
    "t_max_ns",
    "dt_ns",
    "out",
    "format",
    "sweep_axis",
    "sweep_values",
    "route",
    "kappa_lo_ghz",
    "kappa_hi_ghz",
    "delta_min_ghz",
    "delta_max_ghz",
    "delta_points",
    "reference",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub g0_ghz: Option<f64>,
    pub kappa_ghz: Option<f64>,
    pub gamma_ghz: Option<f64>,
    pub delta_ghz: f64,
    pub gamma0_ghz: Option<f64>,
    pub t_max_ns: Option<f64>,
    pub dt_ns: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub sweep_axis: Option<SweepAxis>,
    /// Axis values in GHz.
    pub sweep_values: Vec<f64>,
    pub route: Route,
    pub kappa_lo_ghz: f64,
    pub kappa_hi_ghz: f64,
    pub delta_min_ghz: Option<f64>,
    pub delta_max_ghz: Option<f64>,
    pub delta_points: usize,
    /// Add closed-form reference columns to trajectory output.
    pub reference: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            g0_ghz: None,
            kappa_ghz: None,
            gamma_ghz: None,
            delta_ghz: 0.0,
            gamma0_ghz: None,
            t_max_ns: None,
            dt_ns: None,
            out: None,
            format: None,
            sweep_axis: None,
            sweep_values: Vec::new(),
            route: Route::Analytic,
            kappa_lo_ghz: 0.1,
            kappa_hi_ghz: 100.0,
            delta_min_ghz: None,
            delta_max_ghz: None,
            delta_points: 4001,
            reference: false,
        }
    }
}

fn number(key: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>()
        .map_err(|_| Error::Config(format!("`{key}`: expected a number, got `{raw}`")))
}

fn boolean(key: &str, raw: &str) -> Result<bool> {
    match raw {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!(
            "`{key}`: expected true or false, got `{raw}`"
        ))),
    }
}

impl RunConfig {
    /// Parses a config file body.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            if seen.iter().any(|k| k == key) {
                return Err(Error::Config(format!(
                    "line {}: duplicate key `{key}`",
                    lineno + 1
                )));
            }
            cfg.set(key, value.trim())
                .map_err(|e| Error::Config(format!("line {}: {}", lineno + 1, strip(e))))?;
            seen.push(key.to_string());
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Sets one key from its textual value. Later calls win.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        match key {
            "g0_ghz" => self.g0_ghz = Some(number(key, raw)?),
            "kappa_ghz" => self.kappa_ghz = Some(number(key, raw)?),
            "gamma_ghz" => self.gamma_ghz = Some(number(key, raw)?),
            "delta_ghz" => self.delta_ghz = number(key, raw)?,
            "gamma0_ghz" => self.gamma0_ghz = Some(number(key, raw)?),
            "t_max_ns" => self.t_max_ns = Some(number(key, raw)?),
            "dt_ns" => self.dt_ns = Some(number(key, raw)?),
            "out" => self.out = Some(PathBuf::from(raw)),
            "format" => self.format = Some(raw.parse()?),
            "sweep_axis" => {
                self.sweep_axis = Some(raw.parse().map_err(|e: Error| Error::Config(strip(e)))?)
            }
            "sweep_values" => {
                self.sweep_values = raw
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| number(key, s))
                    .collect::<Result<_>>()?
            }
            "route" => self.route = raw.parse().map_err(|e: Error| Error::Config(strip(e)))?,
            "kappa_lo_ghz" => self.kappa_lo_ghz = number(key, raw)?,
            "kappa_hi_ghz" => self.kappa_hi_ghz = number(key, raw)?,
            "delta_min_ghz" => self.delta_min_ghz = Some(number(key, raw)?),
            "delta_max_ghz" => self.delta_max_ghz = Some(number(key, raw)?),
            "delta_points" => {
                self.delta_points = raw
                    .parse()
                    .map_err(|_| Error::Config(format!("`{key}`: expected a count, got `{raw}`")))?
            }
            "reference" => self.reference = boolean(key, raw)?,
            other => {
                return Err(Error::Config(format!(
                    "unknown key `{other}` (known: {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    fn required(&self, key: &'static str, v: Option<f64>) -> Result<f64> {
        v.ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
    }

    /// Emitter coupling and loss, for commands that choose κ themselves.
    pub fn emitter(&self) -> Result<(f64, f64)> {
        let g0 = self.required("g0_ghz", self.g0_ghz)?;
        let gamma = self.required("gamma_ghz", self.gamma_ghz)?;
        let probe = SystemParams {
            g0: ghz(g0),
            kappa: 1.0,
            gamma: ghz(gamma),
            delta: 0.0,
            gamma0: None,
        };
        probe.validate().map_err(config_field)?;
        Ok((ghz(g0), ghz(gamma)))
    }

    /// Validated system parameters in angular units.
    pub fn params(&self) -> Result<SystemParams> {
        let p = SystemParams {
            g0: ghz(self.required("g0_ghz", self.g0_ghz)?),
            kappa: ghz(self.required("kappa_ghz", self.kappa_ghz)?),
            gamma: ghz(self.required("gamma_ghz", self.gamma_ghz)?),
            delta: ghz(self.delta_ghz),
            gamma0: self.gamma0_ghz.map(ghz),
        };
        p.validate().map_err(config_field)?;
        Ok(p)
    }

    /// Integration settings: defaults for `p`, overridden by `t_max_ns`/`dt_ns`.
    pub fn integration(&self, p: &SystemParams) -> Result<IntegrationConfig> {
        let mut cfg = IntegrationConfig::for_params(p);
        if let Some(t) = self.t_max_ns {
            cfg.t_max = t;
        }
        if let Some(dt) = self.dt_ns {
            cfg.dt = dt;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Renames a parameter validation error to the config key it came from.
fn config_field(e: Error) -> Error {
    match e {
        Error::InvalidParam { field, reason } => Error::Config(format!("`{field}_ghz` {reason}")),
        other => other,
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Config(msg) => msg,
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const OPTIMAL: &str = "\
# optimal cavity
g0_ghz = 8.0
kappa_ghz = 8.0   # equals g0
gamma_ghz = 0.16
";

    #[test]
    fn parses_flat_pairs() {
        let cfg = RunConfig::parse(OPTIMAL).unwrap();
        assert_eq!(cfg.g0_ghz, Some(8.0));
        assert_eq!(cfg.kappa_ghz, Some(8.0));
        assert_eq!(cfg.gamma_ghz, Some(0.16));
        let p = cfg.params().unwrap();
        assert_eq!(p.g0, ghz(8.0));
        assert_eq!(p.delta, 0.0);
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        let e = RunConfig::parse("g0_ghz = 1\nfoo = 2\n").unwrap_err();
        assert!(e.to_string().contains("line 2") && e.to_string().contains("`foo`"));
        let e = RunConfig::parse("g0_ghz = 1\ng0_ghz = 2\n").unwrap_err();
        assert!(e.to_string().contains("duplicate"));
        assert!(RunConfig::parse("g0_ghz 1\n").is_err());
        assert!(RunConfig::parse("g0_ghz = abc\n").is_err());
        assert!(RunConfig::parse("format = xml\n").is_err());
    }

    #[test]
    fn missing_key_is_named() {
        let cfg = RunConfig::parse("kappa_ghz = 8\ngamma_ghz = 0.16\n").unwrap();
        let e = cfg.params().unwrap_err();
        assert!(e.to_string().contains("g0_ghz"), "{e}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn invalid_value_names_the_key() {
        let cfg = RunConfig::parse("g0_ghz = 8\nkappa_ghz = -1\ngamma_ghz = 0.16\n").unwrap();
        let e = cfg.params().unwrap_err();
        assert!(e.to_string().contains("kappa_ghz"), "{e}");
    }

    #[test]
    fn lists_and_enums() {
        let cfg = RunConfig::parse(
            "sweep_axis = kappa\nsweep_values = 3.2, 8.0,16\nroute = numeric\nreference = true\nformat = json\n",
        )
        .unwrap();
        assert_eq!(cfg.sweep_axis, Some(SweepAxis::Kappa));
        assert_eq!(cfg.sweep_values, vec![3.2, 8.0, 16.0]);
        assert_eq!(cfg.route, Route::Numeric);
        assert!(cfg.reference);
        assert_eq!(cfg.format, Some(Format::Json));
        assert!(RunConfig::parse("sweep_axis = omega\n").is_err());
    }
}
