//! Run configuration: flags layered over an optional config file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use serde_json::Value;

use crate::output::fmt_num;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Eta,
    BoundState,
    CriticalAlpha,
    GroundEnergy,
    Derivative,
    Dynamics,
    PhaseDiagram,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eta => "eta",
            Command::BoundState => "bound-state",
            Command::CriticalAlpha => "critical-alpha",
            Command::GroundEnergy => "ground-energy",
            Command::Derivative => "derivative",
            Command::Dynamics => "dynamics",
            Command::PhaseDiagram => "phase-diagram",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// `lo:hi:n` sweep range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts.as_slice() else {
            return Err(format!("grid `{s}` is not of the form lo:hi:n"));
        };
        let lo: f64 = lo.trim().parse().map_err(|_| format!("bad grid start in `{s}`"))?;
        let hi: f64 = hi.trim().parse().map_err(|_| format!("bad grid end in `{s}`"))?;
        let n: usize = n.trim().parse().map_err(|_| format!("bad grid count in `{s}`"))?;
        if n == 0 {
            return Err(format!("grid `{s}` has no points"));
        }
        Ok(Self { lo, hi, n })
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", fmt_num(self.lo), fmt_num(self.hi), self.n)
    }
}

/// Partially specified settings; one layer per source.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub command: Option<Command>,
    pub delta: Option<f64>,
    pub alpha: Option<f64>,
    pub omega_c: Option<f64>,
    pub s: Option<f64>,
    pub epsilon: Option<f64>,
    pub tmax: Option<f64>,
    pub dt: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub dalpha: Option<f64>,
    pub grid_alpha: Option<GridSpec>,
    pub grid_delta: Option<GridSpec>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub emit_plot: Option<bool>,
    pub jobs: Option<usize>,
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.trim().parse().map_err(|_| format!("invalid value `{v}` for `{key}`"))
}

fn parse_enum<T: ValueEnum>(key: &str, v: &str) -> Result<T, String> {
    T::from_str(v.trim(), true).map_err(|_| format!("invalid value `{v}` for `{key}`"))
}

impl Settings {
    fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        match key.replace('-', "_").as_str() {
            "command" => self.command = Some(parse_enum(key, v)?),
            "delta" => self.delta = Some(parse(key, v)?),
            "alpha" => self.alpha = Some(parse(key, v)?),
            "omega_c" => self.omega_c = Some(parse(key, v)?),
            "s" => self.s = Some(parse(key, v)?),
            "epsilon" => self.epsilon = Some(parse(key, v)?),
            "tmax" => self.tmax = Some(parse(key, v)?),
            "dt" => self.dt = Some(parse(key, v)?),
            "tol" => self.tol = Some(parse(key, v)?),
            "max_iter" => self.max_iter = Some(parse(key, v)?),
            "dalpha" => self.dalpha = Some(parse(key, v)?),
            "grid_alpha" => self.grid_alpha = Some(v.parse()?),
            "grid_delta" => self.grid_delta = Some(v.parse()?),
            "out" => self.out = Some(PathBuf::from(v.trim())),
            "format" => self.format = Some(parse_enum(key, v)?),
            "emit_plot" => self.emit_plot = Some(parse(key, v)?),
            "jobs" => self.jobs = Some(parse(key, v)?),
            "version" => {}
            other => return Err(format!("unknown config key `{other}`")),
        }
        Ok(())
    }

    /// Parse a `key = value` file, or a JSON document whose `config`
    /// object (or top level) holds the same keys.
    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        if text.trim_start().starts_with('{') {
            Self::from_json(&text)
        } else {
            Self::from_key_values(&text)
        }
    }

    pub fn from_key_values(text: &str) -> Result<Self, String> {
        let mut out = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected key = value", lineno + 1))?;
            out.set(k.trim(), v)?;
        }
        Ok(out)
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let doc: Value = serde_json::from_str(text).map_err(|e| format!("invalid JSON config: {e}"))?;
        let obj = doc
            .get("config")
            .unwrap_or(&doc)
            .as_object()
            .ok_or("JSON config must be an object")?;
        let mut out = Self::default();
        for (k, v) in obj {
            let raw = match v {
                Value::Null => continue,
                Value::String(s) => s.clone(),
                Value::Number(n) => n.to_string(),
                Value::Bool(b) => b.to_string(),
                _ => return Err(format!("config key `{k}` must be a scalar")),
            };
            out.set(k, &raw)?;
        }
        Ok(out)
    }

    /// Fields set in `top` win.
    pub fn overlay(self, top: Settings) -> Settings {
        Settings {
            command: top.command.or(self.command),
            delta: top.delta.or(self.delta),
            alpha: top.alpha.or(self.alpha),
            omega_c: top.omega_c.or(self.omega_c),
            s: top.s.or(self.s),
            epsilon: top.epsilon.or(self.epsilon),
            tmax: top.tmax.or(self.tmax),
            dt: top.dt.or(self.dt),
            tol: top.tol.or(self.tol),
            max_iter: top.max_iter.or(self.max_iter),
            dalpha: top.dalpha.or(self.dalpha),
            grid_alpha: top.grid_alpha.or(self.grid_alpha),
            grid_delta: top.grid_delta.or(self.grid_delta),
            out: top.out.or(self.out),
            format: top.format.or(self.format),
            emit_plot: top.emit_plot.or(self.emit_plot),
            jobs: top.jobs.or(self.jobs),
        }
    }
}

/// Fully resolved run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub delta: f64,
    pub alpha: Option<f64>,
    pub omega_c: f64,
    pub s: f64,
    pub epsilon: f64,
    pub tmax: f64,
    pub dt: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub dalpha: f64,
    pub grid_alpha: Option<GridSpec>,
    pub grid_delta: Option<GridSpec>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub emit_plot: bool,
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn resolve(s: Settings) -> Result<Self, String> {
        let command = s.command.ok_or("no command given (flag or `command` config key)")?;
        let (grid_alpha, grid_delta) = match command {
            Command::GroundEnergy => (
                Some(s.grid_alpha.unwrap_or(GridSpec {
                    lo: 0.0,
                    hi: 0.8,
                    n: 161,
                })),
                None,
            ),
            Command::PhaseDiagram => (
                Some(s.grid_alpha.unwrap_or(GridSpec {
                    lo: 0.0,
                    hi: 1.3,
                    n: 27,
                })),
                Some(s.grid_delta.unwrap_or(GridSpec {
                    lo: 1e-3,
                    hi: 0.3,
                    n: 14,
                })),
            ),
            Command::CriticalAlpha => (None, s.grid_delta),
            Command::Eta | Command::BoundState => (s.grid_alpha, None),
            _ => (None, None),
        };
        let alpha = match command {
            Command::Verify => Some(s.alpha.unwrap_or(0.55)),
            Command::GroundEnergy | Command::PhaseDiagram | Command::CriticalAlpha => None,
            Command::Eta | Command::BoundState if grid_alpha.is_some() => None,
            _ => Some(s.alpha.ok_or_else(|| format!("`{}` needs --alpha", command.name()))?),
        };
        if s.emit_plot == Some(true) && s.out.is_none() {
            return Err("--emit-plot needs --out".into());
        }
        if s.jobs == Some(0) {
            return Err("--jobs must be at least 1".into());
        }
        Ok(Self {
            command,
            delta: s.delta.unwrap_or(0.1),
            alpha,
            omega_c: s.omega_c.unwrap_or(1.0),
            s: s.s.unwrap_or(1.0),
            epsilon: s.epsilon.unwrap_or(0.0),
            tmax: s.tmax.unwrap_or(500.0),
            dt: s.dt.unwrap_or(0.02),
            tol: s.tol.unwrap_or(1e-12),
            max_iter: s.max_iter.unwrap_or(10_000),
            dalpha: s.dalpha.unwrap_or(1e-4),
            grid_alpha,
            grid_delta,
            out: s.out,
            format: s.format.unwrap_or(Format::Csv),
            emit_plot: s.emit_plot.unwrap_or(false),
            jobs: s.jobs,
        })
    }

    /// Resolved settings that determine the data, in a fixed order.
    /// Output path, format and parallelism are left out on purpose.
    pub fn provenance(&self) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        m.insert("command", self.command.name().to_string());
        if self.grid_delta.is_none() {
            m.insert("delta", fmt_num(self.delta));
        }
        if let Some(a) = self.alpha {
            m.insert("alpha", fmt_num(a));
        }
        m.insert("omega_c", fmt_num(self.omega_c));
        m.insert("s", fmt_num(self.s));
        m.insert("epsilon", fmt_num(self.epsilon));
        m.insert("tol", fmt_num(self.tol));
        m.insert("max_iter", self.max_iter.to_string());
        match self.command {
            Command::Dynamics | Command::Verify => {
                m.insert("tmax", fmt_num(self.tmax));
                m.insert("dt", fmt_num(self.dt));
            }
            Command::GroundEnergy | Command::Derivative => {
                m.insert("dalpha", fmt_num(self.dalpha));
            }
            _ => {}
        }
        if let Some(g) = self.grid_alpha {
            m.insert("grid_alpha", g.to_string());
        }
        if let Some(g) = self.grid_delta {
            m.insert("grid_delta", g.to_string());
        }
        m
    }
}
