//! The machine-readable report every command produces, and its renderers.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::Result;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::args::Format;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub results: Vec<Value>,
    /// `None` when the command checks nothing.
    pub pass: Option<bool>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

impl RunReport {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_owned(),
            parameters: BTreeMap::new(),
            results: Vec::new(),
            pass: None,
            seed,
            wall_time_ms: None,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.parameters.insert(key.to_owned(), to_value(value));
        self
    }

    pub fn push(&mut self, row: impl Serialize) {
        self.results.push(to_value(row));
    }

    /// Folds a check outcome into `pass`.
    pub fn record(&mut self, ok: bool) {
        self.pass = Some(self.pass.unwrap_or(true) && ok);
    }

    /// 0 when every check passed (or none applied), 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self.pass {
            Some(false) => 1,
            _ => 0,
        }
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self)?;
                s.push('\n');
                Ok(s)
            }
            Format::Csv => render_csv(&self.results),
            Format::Pretty => Ok(render_pretty(self)),
        }
    }
}

/// Serializes to a JSON value; non-finite floats become `null`.
pub fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn columns(rows: &[Value]) -> Vec<String> {
    let mut cols: Vec<String> = Vec::new();
    for row in rows {
        match row {
            Value::Object(map) => {
                for key in map.keys() {
                    if !cols.contains(key) {
                        cols.push(key.clone());
                    }
                }
            }
            _ => {
                if !cols.iter().any(|c| c == "value") {
                    cols.push("value".into());
                }
            }
        }
    }
    cols
}

fn cell(row: &Value, col: &str, float: fn(f64) -> String) -> String {
    let v = match row {
        Value::Object(map) => map.get(col),
        other if col == "value" => Some(other),
        _ => None,
    };
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => match (n.as_i64(), n.as_u64(), n.as_f64()) {
            (Some(i), _, _) => i.to_string(),
            (_, Some(u), _) => u.to_string(),
            (_, _, Some(f)) => float(f),
            _ => n.to_string(),
        },
        Some(other) => other.to_string(),
    }
}

fn render_csv(rows: &[Value]) -> Result<String> {
    let cols = columns(rows);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&cols)?;
    for row in rows {
        w.write_record(cols.iter().map(|c| cell(row, c, |f| f.to_string())))?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn short_float(f: f64) -> String {
    if f != 0.0 && (f.abs() < 1e-4 || f.abs() >= 1e7) {
        format!("{f:.4e}")
    } else {
        let s = format!("{f:.6}");
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    }
}

fn render_pretty(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}  (seed {})", report.command, report.seed);
    for (k, v) in &report.parameters {
        let _ = writeln!(out, "  {k}: {}", cell(v, "value", short_float));
    }
    let cols = columns(&report.results);
    if !cols.is_empty() {
        let cells: Vec<Vec<String>> = report
            .results
            .iter()
            .map(|r| cols.iter().map(|c| cell(r, c, short_float)).collect())
            .collect();
        let widths: Vec<usize> = cols
            .iter()
            .enumerate()
            .map(|(i, c)| {
                cells
                    .iter()
                    .map(|r| r[i].chars().count())
                    .fold(c.len(), usize::max)
            })
            .collect();
        out.push('\n');
        let line = |fields: Vec<&str>| {
            fields
                .iter()
                .zip(&widths)
                .map(|(f, &w)| format!("{f:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        let _ = writeln!(out, "{}", line(cols.iter().map(String::as_str).collect()));
        for r in &cells {
            let _ = writeln!(out, "{}", line(r.iter().map(String::as_str).collect()));
        }
    }
    match report.pass {
        Some(true) => out.push_str("\nPASS\n"),
        Some(false) => out.push_str("\nFAIL\n"),
        None => {}
    }
    if let Some(ms) = report.wall_time_ms {
        let _ = writeln!(out, "({ms} ms)");
    }
    out
}
