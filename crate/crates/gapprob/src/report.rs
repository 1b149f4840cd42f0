//! JSON envelopes and CSV sweeps written by the command line.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Envelope<C: Serialize, T: Serialize> {
    pub schema_version: u32,
    pub command: String,
    /// The equation or quantity the numbers refer to.
    pub anchor: String,
    pub passed: Option<bool>,
    pub config: C,
    pub result: T,
}

impl<C: Serialize, T: Serialize> Envelope<C, T> {
    pub fn new(command: &str, anchor: &str, passed: Option<bool>, config: C, result: T) -> Self {
        Envelope { schema_version: SCHEMA_VERSION, command: command.into(), anchor: anchor.into(), passed, config, result }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// A sweep: `# key=value` header lines, a column row, then one row per point.
#[derive(Clone, Debug, Default)]
pub struct CsvSweep {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvSweep {
    pub fn new(columns: &[&str]) -> Self {
        CsvSweep { columns: columns.iter().map(|c| c.to_string()).collect(), ..Default::default() }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.into(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.iter().map(|c| quote(c)).collect::<Vec<_>>().join(","));
        }
        out
    }
}

fn quote(c: &str) -> String {
    if c.contains([',', '"', '\n']) {
        format!("\"{}\"", c.replace('"', "\"\""))
    } else {
        c.to_string()
    }
}

/// CSV cell for a JSON scalar; nested values are written as compact JSON.
pub fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        other => other.to_string(),
    }
}
