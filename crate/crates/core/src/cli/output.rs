//! Output records and their two renderings: aligned tables for people and
//! one JSON object per line for machines.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const TOOL_VERSION: &str = concat!("nhat ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub command: String,
    pub inputs: Map<String, Value>,
    pub outputs: Map<String, Value>,
    pub seed: Option<u64>,
    pub tool_version: String,
}

impl OutputRecord {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_owned(),
            inputs: Map::new(),
            outputs: Map::new(),
            seed: None,
            tool_version: TOOL_VERSION.to_owned(),
        }
    }

    pub fn input(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.inputs.insert(key.to_owned(), value.into());
        self
    }

    pub fn output(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.outputs.insert(key.to_owned(), value.into());
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("records hold only JSON-safe values")
    }

    pub fn from_json_line(line: &str) -> serde_json::Result<Self> {
        serde_json::from_str(line)
    }

    fn columns(&self) -> Vec<&str> {
        let mut cols: Vec<&str> = self.inputs.keys().map(String::as_str).collect();
        cols.extend(self.outputs.keys().map(String::as_str));
        if self.seed.is_some() {
            cols.push("seed");
        }
        cols
    }

    fn cells(&self, precision: usize) -> Vec<String> {
        let mut cells: Vec<String> = self
            .inputs
            .values()
            .chain(self.outputs.values())
            .map(|v| format_value(v, precision))
            .collect();
        if let Some(seed) = self.seed {
            cells.push(seed.to_string());
        }
        cells
    }
}

/// Non-finite floats have no JSON form; they become null.
pub fn float(value: f64) -> Value {
    serde_json::Number::from_f64(value).map_or(Value::Null, Value::Number)
}

pub fn opt_float(value: Option<f64>) -> Value {
    value.map_or(Value::Null, float)
}

/// `digits` significant digits, switching to exponent form for very large or
/// very small magnitudes.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let magnitude = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&magnitude) {
        return format!("{:.*e}", digits - 1, x);
    }
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn format_value(value: &Value, precision: usize) -> String {
    match value {
        Value::Null => "NA".to_owned(),
        Value::Number(n) if n.is_f64() => format_sig(n.as_f64().unwrap_or(f64::NAN), precision),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    JsonLines,
}

/// Consecutive records sharing a command and column set form one table.
pub fn render(records: &[OutputRecord], format: Format, precision: usize) -> String {
    match format {
        Format::JsonLines => records
            .iter()
            .map(|r| r.to_json_line() + "\n")
            .collect(),
        Format::Table => {
            let mut out = String::new();
            let mut start = 0;
            while start < records.len() {
                let head = &records[start];
                let cols = head.columns();
                let mut end = start + 1;
                while end < records.len()
                    && records[end].command == head.command
                    && records[end].columns() == cols
                {
                    end += 1;
                }
                if !out.is_empty() {
                    out.push('\n');
                }
                out.push_str(&render_table(&head.command, &cols, &records[start..end], precision));
                start = end;
            }
            out
        }
    }
}

fn render_table(command: &str, cols: &[&str], rows: &[OutputRecord], precision: usize) -> String {
    let cells: Vec<Vec<String>> = rows.iter().map(|r| r.cells(precision)).collect();
    let widths: Vec<usize> = cols
        .iter()
        .enumerate()
        .map(|(i, c)| cells.iter().map(|row| row[i].len()).fold(c.len(), usize::max))
        .collect();
    let line = |items: Vec<&str>| {
        items
            .iter()
            .zip(&widths)
            .map(|(s, w)| format!("{s:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_owned()
            + "\n"
    };
    let mut out = format!("# {command}\n");
    out.push_str(&line(cols.to_vec()));
    for row in &cells {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}
