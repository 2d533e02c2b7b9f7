//! Tabular outputs. A CSV file holds one table with a fixed header; a JSON
//! document holds every table of a command plus the echoed config and
//! provenance metadata.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{ExperimentConfig, Format};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(cell)).map_err(io)?;
        }
        String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.to_string()))?).map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn from_csv(name: &str, text: &str) -> Result<Self, CliError> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let columns = r.headers().map_err(io)?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec.map_err(io)?.iter().map(parse_cell).collect());
        }
        Ok(Table { name: name.into(), columns, rows })
    }
}

/// A finite float as a JSON number, `±inf` as a string, NaN as null.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
    } else if v.is_nan() {
        Value::Null
    } else if v > 0.0 {
        Value::String("inf".into())
    } else {
        Value::String("-inf".into())
    }
}

pub fn text(s: &str) -> Value {
    Value::String(s.into())
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn parse_cell(s: &str) -> Value {
    if s.is_empty() {
        return Value::Null;
    }
    if let Ok(i) = s.parse::<i64>() {
        return Value::from(i);
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => num(v),
        _ => Value::String(s.into()),
    }
}

fn io(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub command: String,
    pub config: ExperimentConfig,
    pub metadata: BTreeMap<String, Value>,
    pub tables: Vec<Table>,
}

impl Document {
    /// Writes the document in the configured format under `dir`; returns the
    /// files written.
    pub fn write(&self, dir: &Path, format: Format) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let mut written = Vec::new();
        match format {
            Format::Json => {
                let path = dir.join(format!("{}.json", self.command));
                write_file(&path, &(serde_json::to_string_pretty(self).expect("serializable") + "\n"))?;
                written.push(path);
            }
            Format::Csv => {
                for t in &self.tables {
                    let path = dir.join(format!("{}_{}.csv", self.command, t.name));
                    write_file(&path, &t.to_csv()?)?;
                    written.push(path);
                }
                let meta = dir.join(format!("{}_metadata.json", self.command));
                write_file(&meta, &(serde_json::to_string_pretty(&self.metadata).expect("serializable") + "\n"))?;
                written.push(meta);
            }
        }
        Ok(written)
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let mut t = Table::new("rows", &["p", "value", "verdict"]);
        t.push(vec![num(4.0), num(0.1 + 0.2), text("PASS")]);
        t.push(vec![num(6.5), num(f64::INFINITY), Value::Null]);
        let csv = t.to_csv().unwrap();
        assert_eq!(csv.lines().next(), Some("p,value,verdict"));
        let back = Table::from_csv("rows", &csv).unwrap();
        assert_eq!(back.rows[0][1], num(0.1 + 0.2));
        assert_eq!(back.rows[1][1], text("inf"));
        assert_eq!(back.rows[1][2], Value::Null);
    }

    #[test]
    fn special_values() {
        assert_eq!(num(f64::NAN), Value::Null);
        assert_eq!(num(f64::NEG_INFINITY), text("-inf"));
    }
}
