//! Table assembly and CSV/JSON writers.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{Map, Number, Value};

use crate::config::{Format, RunConfig};

/// 17 significant digits, fixed layout.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => u8::from(*b).to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => num_value(*x),
            Cell::Int(n) => Value::from(*n),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

fn num_value(x: f64) -> Value {
    if x.is_finite() {
        // keeps the fixed 17-digit text thanks to arbitrary_precision
        serde_json::from_str::<Number>(&fmt_num(x))
            .map(Value::Number)
            .unwrap_or(Value::Null)
    } else {
        Value::Null
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, columns: &[&'static str]) -> Self {
        Self {
            name,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Everything a command produces.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub summary: Vec<(&'static str, Cell)>,
    pub tables: Vec<Table>,
}

fn header_lines(cfg: &RunConfig, summary: &[(&'static str, Cell)]) -> String {
    let mut s = format!("# sbm {}\n", env!("CARGO_PKG_VERSION"));
    for (k, v) in cfg.provenance() {
        s.push_str(&format!("# {k} = {v}\n"));
    }
    for (k, v) in summary {
        s.push_str(&format!("# result.{k} = {}\n", v.csv()));
    }
    s
}

fn table_csv(t: &Table) -> String {
    let mut s = t.columns.join(",");
    s.push('\n');
    for row in &t.rows {
        let line: Vec<String> = row.iter().map(Cell::csv).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

fn config_json(prov: &BTreeMap<&'static str, String>) -> Value {
    let mut m = Map::new();
    m.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
    for (k, v) in prov {
        let val = match *k {
            "command" | "grid_alpha" | "grid_delta" => Value::String(v.clone()),
            "max_iter" => v
                .parse::<u64>()
                .map(Value::from)
                .unwrap_or_else(|_| Value::String(v.clone())),
            _ => v
                .parse::<f64>()
                .map(num_value)
                .unwrap_or_else(|_| Value::String(v.clone())),
        };
        m.insert((*k).into(), val);
    }
    Value::Object(m)
}

pub fn to_json(cfg: &RunConfig, report: &Report) -> String {
    let mut summary = Map::new();
    for (k, v) in &report.summary {
        summary.insert((*k).into(), v.json());
    }
    let mut tables = Map::new();
    for t in &report.tables {
        let mut obj = Map::new();
        obj.insert(
            "columns".into(),
            Value::Array(t.columns.iter().map(|c| Value::String((*c).into())).collect()),
        );
        obj.insert(
            "rows".into(),
            Value::Array(
                t.rows
                    .iter()
                    .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
                    .collect(),
            ),
        );
        tables.insert(t.name.into(), Value::Object(obj));
    }
    let mut root = Map::new();
    root.insert("config".into(), config_json(&cfg.provenance()));
    root.insert("summary".into(), Value::Object(summary));
    root.insert("tables".into(), Value::Object(tables));
    let mut s = serde_json::to_string_pretty(&Value::Object(root)).expect("JSON serialization");
    s.push('\n');
    s
}

/// Path of an additional table next to the main output file.
pub fn sibling_path(out: &Path, name: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let file = match out.extension() {
        Some(ext) => format!("{stem}.{name}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{name}"),
    };
    out.with_file_name(file)
}

/// Write the report; returns the data files written, table by table.
pub fn emit(cfg: &RunConfig, report: &Report) -> std::io::Result<Vec<(PathBuf, String)>> {
    let header = header_lines(cfg, &report.summary);
    let mut written = Vec::new();
    match (cfg.format, &cfg.out) {
        (Format::Json, Some(path)) => {
            std::fs::write(path, to_json(cfg, report))?;
            written.push((path.clone(), String::new()));
        }
        (Format::Json, None) => std::io::stdout().write_all(to_json(cfg, report).as_bytes())?,
        (Format::Csv, Some(path)) => {
            for (i, t) in report.tables.iter().enumerate() {
                let p = if i == 0 {
                    path.clone()
                } else {
                    sibling_path(path, t.name)
                };
                std::fs::write(&p, format!("{header}{}", table_csv(t)))?;
                written.push((p, t.name.to_string()));
            }
        }
        (Format::Csv, None) => {
            let mut out = std::io::stdout().lock();
            out.write_all(header.as_bytes())?;
            for (i, t) in report.tables.iter().enumerate() {
                if i > 0 {
                    writeln!(out)?;
                }
                out.write_all(table_csv(t).as_bytes())?;
            }
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_carry_seventeen_digits() {
        assert_eq!(fmt_num(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_num(f64::NAN), "nan");
        assert_eq!(fmt_num(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(num_value(0.1).to_string(), "1.0000000000000001e-1");
        assert_eq!(num_value(f64::INFINITY), Value::Null);
    }

    #[test]
    fn sibling_paths() {
        assert_eq!(
            sibling_path(Path::new("/tmp/pd.csv"), "boundaries"),
            PathBuf::from("/tmp/pd.boundaries.csv")
        );
        assert_eq!(
            sibling_path(Path::new("pd"), "boundaries"),
            PathBuf::from("pd.boundaries")
        );
    }
}
