//! Report rows and their CSV form.
//!
//! Header `k,metric,measured,bound_name,bound,satisfied`; floats in `{:.16e}`
//! (17 significant digits, so values round-trip exactly); LF line endings.
//! Metric-only rows leave the last three fields empty.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const HEADER: &str = "k,metric,measured,bound_name,bound,satisfied";

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub k: u64,
    pub metric: String,
    pub measured: f64,
    pub bound: Option<BoundValue>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundValue {
    pub name: String,
    pub value: f64,
    pub satisfied: bool,
}

impl ReportRow {
    pub fn metric_only(k: u64, metric: impl Into<String>, measured: f64) -> Self {
        ReportRow {
            k,
            metric: metric.into(),
            measured,
            bound: None,
        }
    }

    pub fn with_bound(k: u64, metric: impl Into<String>, measured: f64, name: impl Into<String>, value: f64) -> Self {
        ReportRow {
            k,
            metric: metric.into(),
            measured,
            bound: Some(BoundValue {
                name: name.into(),
                value,
                satisfied: satisfies(measured, value),
            }),
        }
    }

    pub fn satisfied(&self) -> Option<bool> {
        self.bound.as_ref().map(|b| b.satisfied)
    }

    pub fn to_csv_line(&self) -> String {
        match &self.bound {
            Some(b) => format!(
                "{},{},{:.16e},{},{:.16e},{}",
                self.k, self.metric, self.measured, b.name, b.value, b.satisfied
            ),
            None => format!("{},{},{:.16e},,,", self.k, self.metric, self.measured),
        }
    }
}

/// `measured ≤ bound` up to a relative `1e-9` (plus `1e-14` absolute),
/// which absorbs rounding in cases where a bound holds with equality.
pub fn satisfies(measured: f64, bound: f64) -> bool {
    measured <= bound + 1e-9 * bound.abs() + 1e-14
}

pub fn write_rows<W: Write>(out: &mut W, rows: &[ReportRow]) -> std::io::Result<()> {
    out.write_all(HEADER.as_bytes())?;
    out.write_all(b"\n")?;
    for r in rows {
        out.write_all(r.to_csv_line().as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_report(rows: &[ReportRow], path: &Path) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let mut out = BufWriter::new(fs::File::create(path).map_err(io)?);
    write_rows(&mut out, rows).map_err(io)?;
    out.flush().map_err(io)
}

fn parse_line(line: &str, lineno: usize) -> Result<ReportRow> {
    let bad = |what: &str| Error::Validation(format!("report line {lineno}: {what}"));
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 6 {
        return Err(bad(&format!("expected 6 fields, got {}", fields.len())));
    }
    let k = fields[0].parse().map_err(|_| bad("bad k"))?;
    let measured = fields[2].parse().map_err(|_| bad("bad measured value"))?;
    let bound = if fields[3].is_empty() {
        None
    } else {
        Some(BoundValue {
            name: fields[3].to_string(),
            value: fields[4].parse().map_err(|_| bad("bad bound value"))?,
            satisfied: fields[5].parse().map_err(|_| bad("bad satisfied flag"))?,
        })
    };
    Ok(ReportRow {
        k,
        metric: fields[1].to_string(),
        measured,
        bound,
    })
}

pub fn read_report(path: &Path) -> Result<Vec<ReportRow>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines = text.lines();
    if lines.next() != Some(HEADER) {
        return Err(Error::Validation(format!("{} does not start with the report header", path.display())));
    }
    lines.enumerate().map(|(i, l)| parse_line(l, i + 2)).collect()
}
