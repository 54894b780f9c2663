//! CSV tables for plotting, plus a manifest carrying the schema version.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::report::Report;
use super::SCHEMA_VERSION;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => format_sig12(*x),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header of `{}`", self.name);
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }
}

/// `x` with 12 significant digits, fixed notation for moderate magnitudes and
/// scientific otherwise, trailing zeros removed.
pub fn format_sig12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Table of every asserted check in the report; header-only when there are none.
pub fn checks_table(report: &Report) -> Table {
    let mut t = Table::new("checks", &["run_id", "check", "lhs", "rhs", "ok"]);
    for r in &report.runs {
        for c in &r.checks {
            t.push(vec![r.id.as_str().into(), c.name.as_str().into(), c.lhs.into(), c.rhs.into(), c.ok.into()]);
        }
        if let Some(e) = &r.error {
            t.push(vec![
                r.id.as_str().into(),
                format!("error: {e}").into(),
                f64::NAN.into(),
                f64::NAN.into(),
                false.into(),
            ]);
        }
    }
    t
}

#[derive(Serialize)]
struct ManifestEntry<'a> {
    name: &'a str,
    file: String,
    columns: &'a [String],
    rows: usize,
}

/// Writes `checks.csv`, one CSV per report table, and `tables.json` listing
/// them with the schema version. Returns the CSV paths.
pub fn emit_tables(report: &Report, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let checks = checks_table(report);
    let all: Vec<&Table> = std::iter::once(&checks).chain(report.tables.iter()).collect();
    let mut paths = Vec::new();
    for t in &all {
        let path = dir.join(t.file_name());
        write_csv(t, &path)?;
        paths.push(path);
    }
    let manifest = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "tables": all.iter().map(|t| ManifestEntry { name: &t.name, file: t.file_name(), columns: &t.columns, rows: t.rows.len() }).collect::<Vec<_>>(),
    });
    std::fs::write(dir.join("tables.json"), serde_json::to_string_pretty(&manifest).expect("manifest serializes"))?;
    Ok(paths)
}

pub fn write_csv(t: &Table, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(&t.columns).map_err(csv_err)?;
    for row in &t.rows {
        w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV written by [`write_csv`]: the header and the raw string cells.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(csv_err)?.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Numerical(format!("csv: {other:?}")),
    }
}
