//! Tabular sweep output shared by the library and the CLI.
//!
//! CSV layout:
//!
//! ```text
//! # tool: isingring 0.1.0
//! # command: thermal
//! # num_qubits: 3
//! lambda,temperature,concurrence
//! 1.0000000000000000e0,1.0000000000000000e-1,2.8...e-1
//! ```
//!
//! Reals are written with 17 significant digits, integers as integers, and
//! lines end in `\n`, so identical inputs give identical bytes.

use std::fmt::Write as _;
use std::io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Real(f64),
}

impl Cell {
    pub fn as_f64(self) -> f64 {
        match self {
            Cell::Int(i) => i as f64,
            Cell::Real(x) => x,
        }
    }

    fn write_to(self, out: &mut String) {
        match self {
            Cell::Int(i) => write!(out, "{i}").unwrap(),
            Cell::Real(x) => write!(out, "{x:.16e}").unwrap(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub schema: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Ordered `(key, value)` pairs; the first entry is always the tool version.
    pub metadata: Vec<(String, String)>,
}

impl SweepResult {
    pub fn new(command: &str, schema: &[&str]) -> Self {
        SweepResult {
            schema: schema.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            metadata: vec![
                ("tool".into(), format!("{TOOL_NAME} {TOOL_VERSION}")),
                ("command".into(), command.into()),
            ],
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.set_meta(key, value);
        self
    }

    /// Sets `key`, replacing an existing entry in place.
    pub fn set_meta(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string().replace('\n', " ");
        match self.metadata.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.metadata.push((key.into(), value)),
        }
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.schema.len() {
            return Err(Error::InternalConsistency(format!(
                "row of width {} for {} columns",
                row.len(),
                self.schema.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[c].as_f64()).collect())
    }

    pub fn check_row_count(&self, expected: usize) -> Result<()> {
        if self.rows.len() != expected {
            return Err(Error::InternalConsistency(format!(
                "{} rows, expected {expected}",
                self.rows.len()
            )));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}: {v}").unwrap();
        }
        out.push_str(&self.schema.join(","));
        out.push('\n');
        for row in &self.rows {
            for (c, cell) in row.iter().enumerate() {
                if c > 0 {
                    out.push(',');
                }
                cell.write_to(&mut out);
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn write_csv(&self, w: &mut impl io::Write) -> io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }

    /// Parses the CSV layout written by [`SweepResult::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut metadata = Vec::new();
        let mut lines = text.lines();
        let header = loop {
            let line = lines
                .next()
                .ok_or_else(|| Error::invalid("csv has no header row"))?;
            match line.strip_prefix('#') {
                Some(meta) => {
                    let (k, v) = meta
                        .trim_start()
                        .split_once(": ")
                        .ok_or_else(|| Error::invalid(format!("bad metadata line {line:?}")))?;
                    metadata.push((k.to_string(), v.to_string()));
                }
                None => break line,
            }
        };
        let schema: Vec<String> = header.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for (no, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(parse_cell)
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::invalid(format!("bad value on data row {}", no + 1)))?;
            if row.len() != schema.len() {
                return Err(Error::invalid(format!(
                    "data row {} has {} fields, header has {}",
                    no + 1,
                    row.len(),
                    schema.len()
                )));
            }
            rows.push(row);
        }
        Ok(SweepResult {
            schema,
            rows,
            metadata,
        })
    }
}

fn parse_cell(s: &str) -> Option<Cell> {
    if let Ok(i) = s.parse::<i64>() {
        return Some(Cell::Int(i));
    }
    s.parse::<f64>().ok().map(Cell::Real)
}

/// Inclusive linear grid of `steps` points.
pub fn linspace(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite()) {
        return Err(Error::invalid("grid bounds must be finite"));
    }
    match steps {
        0 => Err(Error::invalid("grid needs at least one point")),
        1 if min == max => Ok(vec![min]),
        1 => Err(Error::invalid("a one-point grid needs min == max")),
        _ if max <= min => Err(Error::invalid(format!("grid max {max} <= min {min}"))),
        _ => {
            let h = (max - min) / (steps - 1) as f64;
            let mut g: Vec<f64> = (0..steps).map(|k| min + h * k as f64).collect();
            g[steps - 1] = max;
            Ok(g)
        }
    }
}
