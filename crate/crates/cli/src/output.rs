use std::fmt::Write as _;

use clap::ValueEnum;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Plain,
}

/// A report ready to print. `table` is the CSV form when the report has a
/// natural tabular view; otherwise CSV falls back to flattened `key,value`.
pub struct Rendered {
    pub value: Value,
    pub table: Option<String>,
}

impl Rendered {
    pub fn new(value: Value) -> Self {
        Rendered { value, table: None }
    }

    pub fn with_table(value: Value, table: String) -> Self {
        Rendered { value, table: Some(table) }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut out = serde_json::to_string_pretty(&self.value).expect("serializable value");
                out.push('\n');
                out
            }
            Format::Csv => match &self.table {
                Some(table) => table.clone(),
                None => {
                    let mut out = String::from("key,value\n");
                    for (k, v) in flatten(&self.value) {
                        writeln!(out, "{k},{}", csv_field(&v)).unwrap();
                    }
                    out
                }
            },
            Format::Plain => {
                let mut out = String::new();
                for (k, v) in flatten(&self.value) {
                    writeln!(out, "{k}={v}").unwrap();
                }
                out
            }
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Dotted paths to every scalar, in document order.
pub fn flatten(value: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    walk(value, String::new(), &mut out);
    out
}

fn walk(value: &Value, path: String, out: &mut Vec<(String, String)>) {
    let join = |key: &str| if path.is_empty() { key.to_string() } else { format!("{path}.{key}") };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                walk(v, join(k), out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                walk(v, join(&i.to_string()), out);
            }
        }
        Value::String(s) => out.push((path, s.clone())),
        Value::Null => out.push((path, "null".into())),
        other => out.push((path, other.to_string())),
    }
}
