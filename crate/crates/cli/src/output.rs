use std::fmt;
use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: Option<&Path>) -> io::Result<()> {
        let sink: Box<dyn Write> = match path {
            Some(p) => Box::new(File::create(p).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", p.display())))?),
            None => Box::new(io::stdout().lock()),
        };
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()
    }
}

/// A measured value against its limit.
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: String,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, limit: format!("<= {limit:e}"), passed: value <= limit }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, limit: format!(">= {limit:e}"), passed: value >= limit }
    }

    pub fn above(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, limit: format!("> {limit:e}"), passed: value > limit }
    }

    pub fn ok(&self) -> bool {
        self.passed
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "ok" } else { "BREACH" };
        write!(f, "{verdict:<6} {} = {:.3e} ({})", self.name, self.value, self.limit)
    }
}

pub struct Report {
    pub table: Table,
    pub checks: Vec<Check>,
    /// Free-form lines for standard error.
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(table: Table) -> Self {
        Self { table, checks: Vec::new(), notes: Vec::new() }
    }
}
