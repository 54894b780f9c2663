//! Plain-text matrix format.
//!
//! ```text
//! # comment lines start with '#'
//! layout A:2 B:2
//! 0.5,0 0,0 0,0 0.5,0
//! ...
//! ```
//!
//! One row per line, entries `re,im` separated by whitespace. Floats are written
//! in shortest round-trip form so parsing reproduces every bit.

use faer::Mat;

use super::density::DensityMatrix;
use super::layout::RegisterLayout;
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};

pub fn format_matrix(layout: &RegisterLayout, m: &CMat) -> String {
    let mut out = format!("layout {}\n", layout.header());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:?},{:?}", m[(i, j)].re, m[(i, j)].im)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<(RegisterLayout, CMat)> {
    let mut layout = None;
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let perr = |message: String| Error::Parse { line: n + 1, message };
        if layout.is_none() {
            let rest = line.strip_prefix("layout").ok_or_else(|| perr("expected `layout` header".into()))?;
            layout = Some(RegisterLayout::parse_header(rest).map_err(|e| perr(e.to_string()))?);
            continue;
        }
        let mut row = Vec::new();
        for tok in line.split_whitespace() {
            let (a, b) = tok.split_once(',').ok_or_else(|| perr(format!("entry `{tok}` is not re,im")))?;
            let x: f64 = a.parse().map_err(|_| perr(format!("bad real part `{a}`")))?;
            let y: f64 = b.parse().map_err(|_| perr(format!("bad imaginary part `{b}`")))?;
            row.push(C64::new(x, y));
        }
        rows.push(row);
    }
    let layout = layout.ok_or(Error::Parse { line: 0, message: "missing layout header".into() })?;
    let d = layout.dim();
    if rows.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: rows.len() });
    }
    for r in &rows {
        if r.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: r.len() });
        }
    }
    Ok((layout, Mat::from_fn(d, d, |i, j| rows[i][j])))
}

impl DensityMatrix {
    pub fn to_text(&self) -> String {
        format_matrix(self.layout(), self.matrix())
    }

    pub fn from_text(text: &str) -> Result<DensityMatrix> {
        let (layout, m) = parse_matrix(text)?;
        DensityMatrix::new(layout, m)
    }
}
