//! The report document every subcommand emits, as JSON or one-row CSV.

use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use smoothopt::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Serialize)]
pub struct InstanceInfo {
    pub path: String,
    pub sha256: String,
    pub kind: &'static str,
    pub n: usize,
    /// Edges, clauses, constraints or monomials depending on `kind`.
    pub m: usize,
}

impl InstanceInfo {
    pub fn new(path: &Path, text: &str, kind: &'static str, n: usize, m: usize) -> Self {
        let digest = Sha256::digest(text.as_bytes());
        InstanceInfo {
            path: path.display().to_string(),
            sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
            kind,
            n,
            m,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Document {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub command: String,
    pub instance: Option<InstanceInfo>,
    pub config: Value,
    pub result: Value,
    /// Wall-clock figures; everything else is reproducible from the seed.
    pub timings: Value,
}

pub fn json_error(e: serde_json::Error) -> Error {
    Error::Invariant(format!("report serialization failed: {e}"))
}

impl Document {
    pub fn new(command: &str, instance: Option<InstanceInfo>, config: Value, result: Value, timings: Value) -> Self {
        Document {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            instance,
            config,
            result,
            timings,
        }
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).map_err(json_error)?;
                s.push('\n');
                Ok(s)
            }
            Format::Csv => {
                let value = serde_json::to_value(self).map_err(json_error)?;
                let mut cells = Vec::new();
                flatten("", &value, &mut cells);
                let mut w = csv::Writer::from_writer(Vec::new());
                let csv_err = |e: csv::Error| Error::Invariant(format!("CSV export failed: {e}"));
                w.write_record(cells.iter().map(|(k, _)| k.as_str())).map_err(csv_err)?;
                w.write_record(cells.iter().map(|(_, v)| v.as_str())).map_err(csv_err)?;
                let bytes = w
                    .into_inner()
                    .map_err(|e| Error::Invariant(format!("CSV export failed: {e}")))?;
                String::from_utf8(bytes).map_err(|e| Error::Invariant(e.to_string()))
            }
        }
    }

    pub fn emit(&self, format: Format, out: Option<&Path>) -> Result<()> {
        let text = self.render(format)?;
        match out {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| Error::input(format!("{}: {e}", path.display()))),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(text.as_bytes())
                    .map_err(|e| Error::input(format!("stdout: {e}")))
            }
        }
    }
}

/// Dotted-key columns; arrays of scalars collapse into one space-separated cell.
fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => flatten_map(prefix, map, out),
        Value::Array(items) if items.iter().all(|v| !v.is_object() && !v.is_array()) => {
            let joined: Vec<String> = items.iter().map(scalar).collect();
            out.push((prefix.to_string(), joined.join(" ")));
        }
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), item, out);
            }
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

fn flatten_map(prefix: &str, map: &Map<String, Value>, out: &mut Vec<(String, String)>) {
    for (k, v) in map {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        flatten(&key, v, out);
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_flattens_nested_fields() {
        let doc = Document::new("x", None, json!({"eps": 0.2}), json!({"best": [1, 0], "k": {"a": null}}), json!({}));
        let text = doc.render(Format::Csv).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        let row = lines.next().unwrap();
        assert!(header.contains("config.eps") && header.contains("result.best") && header.contains("result.k.a"));
        assert!(row.contains("1 0"));
    }

    #[test]
    fn digest_is_hex_sha256() {
        let info = InstanceInfo::new(Path::new("f"), "abc", "graph", 1, 0);
        assert_eq!(info.sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
