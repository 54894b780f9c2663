//! Reports: a header echoing the configuration, one record per run, a summary.
//!
//! On disk a report is JSON lines. Wall-clock timings go to a separate file so
//! that the report body depends only on the configuration and seed.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::ExperimentConfig;
use super::tables::Table;
use super::SCHEMA_VERSION;
use crate::error::{Error, Result};
use crate::protocols::Check;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ReportHeader {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub config: Value,
}

/// Outcome of one run: its asserted checks and whatever data it produced.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunRecord {
    pub id: String,
    pub command: String,
    pub passed: bool,
    pub max_violation: f64,
    pub checks: Vec<Check>,
    /// Set when the run stopped with an error; the run counts as failed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub data: Value,
}

impl RunRecord {
    pub fn new(id: impl Into<String>, command: impl Into<String>, checks: Vec<Check>, data: Value) -> Self {
        let max_violation = checks.iter().map(Check::violation).fold(0.0, f64::max);
        let passed = checks.iter().all(|c| c.ok);
        Self { id: id.into(), command: command.into(), passed, max_violation, checks, error: None, data }
    }

    pub fn failed(id: impl Into<String>, command: impl Into<String>, err: &Error) -> Self {
        Self {
            id: id.into(),
            command: command.into(),
            passed: false,
            max_violation: 0.0,
            checks: Vec::new(),
            error: Some(err.to_string()),
            data: Value::Null,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct Summary {
    pub runs: usize,
    pub passed_runs: usize,
    pub failed_runs: usize,
    pub checks: usize,
    pub failed_checks: usize,
    pub max_violation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub header: ReportHeader,
    /// Sorted by id.
    pub runs: Vec<RunRecord>,
    pub summary: Summary,
    /// Plot-ready tables, written by `emit_tables`.
    pub tables: Vec<Table>,
    /// Seconds per run id; kept out of the report body.
    pub timings: BTreeMap<String, f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
enum Line {
    Header(ReportHeader),
    Run(RunRecord),
    Summary(Summary),
}

impl Report {
    pub fn new(
        config: &ExperimentConfig,
        mut runs: Vec<RunRecord>,
        tables: Vec<Table>,
        timings: BTreeMap<String, f64>,
    ) -> Self {
        runs.sort_by(|a, b| a.id.cmp(&b.id));
        let summary = Summary {
            runs: runs.len(),
            passed_runs: runs.iter().filter(|r| r.passed).count(),
            failed_runs: runs.iter().filter(|r| !r.passed).count(),
            checks: runs.iter().map(|r| r.checks.len()).sum(),
            failed_checks: runs.iter().flat_map(|r| &r.checks).filter(|c| !c.ok).count(),
            max_violation: runs.iter().map(|r| r.max_violation).fold(0.0, f64::max),
        };
        let header = ReportHeader {
            schema_version: SCHEMA_VERSION,
            tool: "erasure".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: serde_json::to_value(config).expect("config serializes"),
        };
        Self { header, runs, summary, tables, timings }
    }

    /// No failed checks and no failed runs.
    pub fn passed(&self) -> bool {
        self.summary.failed_runs == 0 && self.summary.failed_checks == 0
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    /// The JSON-lines body: header, runs in id order, summary.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |line: &Line| {
            out.push_str(&serde_json::to_string(line).expect("report serializes"));
            out.push('\n');
        };
        push(&Line::Header(self.header.clone()));
        for r in &self.runs {
            push(&Line::Run(r.clone()));
        }
        push(&Line::Summary(self.summary.clone()));
        out
    }

    /// Reads a body written by [`Report::to_jsonl`]; tables and timings come back empty.
    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut header = None;
        let mut runs = Vec::new();
        let mut summary = None;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parsed: Line =
                serde_json::from_str(line).map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?;
            match parsed {
                Line::Header(h) => header = Some(h),
                Line::Run(r) => runs.push(r),
                Line::Summary(s) => summary = Some(s),
            }
        }
        let missing = |what: &str| Error::Parse { line: 0, message: format!("report has no {what} line") };
        Ok(Self {
            header: header.ok_or_else(|| missing("header"))?,
            runs,
            summary: summary.ok_or_else(|| missing("summary"))?,
            tables: Vec::new(),
            timings: BTreeMap::new(),
        })
    }

    pub fn timings_json(&self) -> String {
        let total: f64 = self.timings.values().sum();
        let v = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "seconds": self.timings,
            "total_seconds": total,
        });
        serde_json::to_string_pretty(&v).expect("timings serialize")
    }

    /// Writes `report.jsonl` and `timings.json` into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::File::create(dir.join(REPORT_FILE))?.write_all(self.to_jsonl().as_bytes())?;
        std::fs::File::create(dir.join(TIMINGS_FILE))?.write_all(self.timings_json().as_bytes())?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let f = std::fs::File::open(dir.join(REPORT_FILE))?;
        let mut text = String::new();
        for line in std::io::BufReader::new(f).lines() {
            text.push_str(&line?);
            text.push('\n');
        }
        Self::from_jsonl(&text)
    }
}

pub const REPORT_FILE: &str = "report.jsonl";
pub const TIMINGS_FILE: &str = "timings.json";
