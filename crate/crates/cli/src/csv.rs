//! CSV output with a fixed column order and a config-echo header.
//!
//! Numeric cells are written with Rust's shortest round-trip float
//! formatting, which is deterministic across runs; no timestamps or other
//! non-reproducible data ever enter the document. Wall-time columns are
//! placed last by convention so reproducibility checks can strip them.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};

use crate::config::KvConfig;

#[derive(Debug, Clone)]
pub struct CsvDoc {
    header_comments: Vec<String>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

/// One CSV cell; numbers format with shortest round-trip notation.
#[derive(Debug, Clone)]
pub enum Cell {
    Str(String),
    Int(i64),
    UInt(u64),
    Float(f64),
    Empty,
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Str(s.to_string())
    }
}
impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Str(s)
    }
}
impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::UInt(v as u64)
    }
}
impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::UInt(v)
    }
}
impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::UInt(u64::from(v))
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Str(s) => s.clone(),
            Cell::Int(v) => v.to_string(),
            Cell::UInt(v) => v.to_string(),
            Cell::Float(v) => {
                if v.is_finite() {
                    format!("{v}")
                } else {
                    // keep NaN/inf spellings stable
                    format!("{v:?}").to_lowercase()
                }
            }
            Cell::Empty => String::new(),
        }
    }
}

impl CsvDoc {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            header_comments: Vec::new(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Echoes the merged effective config into the header.
    pub fn echo_config(&mut self, experiment: &str, cfg: &KvConfig) {
        self.header_comments.push(format!("experiment = {experiment}"));
        for (k, v) in cfg.iter() {
            self.header_comments.push(format!("{k} = {v}"));
        }
    }

    pub fn comment(&mut self, line: &str) {
        self.header_comments.push(line.to_string());
    }

    pub fn push_row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells.iter().map(Cell::render).collect());
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    /// Raw access for in-process consumers (tests, aggregation).
    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    /// Column index by name.
    pub fn col(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Typed float column reader.
    pub fn float_at(&self, row: usize, name: &str) -> Option<f64> {
        let idx = self.col(name)?;
        self.rows[row][idx].parse().ok()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.header_comments {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())
            .with_context(|| format!("writing {}", path.display()))
    }

    /// The document with every column whose name ends in `_ms` removed;
    /// wall times are the only non-reproducible cells.
    pub fn numeric_fingerprint(&self) -> String {
        let keep: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.ends_with("_ms"))
            .map(|(i, _)| i)
            .collect();
        let mut out = String::new();
        for row in &self.rows {
            let picked: Vec<&str> = keep.iter().map(|&i| row[i].as_str()).collect();
            let _ = writeln!(out, "{}", picked.join(","));
        }
        out
    }
}
