//! Report envelope and its JSON and CSV renderings.
//!
//! The payload is a pure function of the command, its resolved settings and
//! the input bytes; the wall-clock time lives in `meta` only.

use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const TOOL: &str = "qpdx";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub gap: f64,
    pub feas: f64,
    pub max_iter: usize,
    /// CP, TP, TN and PPT predicates.
    pub predicate: f64,
    /// Trace normalization of inputs.
    pub normalization: f64,
    /// Reconstruction error allowed for a QPD placed in a circuit.
    pub cut_qpd: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Payload {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Resolved settings, after merging the config file and flags.
    pub inputs: BTreeMap<String, Value>,
    /// SHA-256 of every input, keyed by file path or by `builtin:` name
    /// (hashing the serialized unitary).
    pub input_hashes: BTreeMap<String, String>,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub result: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Meta {
    pub generated_unix_ms: u128,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub payload: Payload,
    pub meta: Meta,
}

impl Report {
    pub fn new(payload: Payload) -> Self {
        let generated_unix_ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0);
        Self {
            payload,
            meta: Meta { generated_unix_ms },
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// Scalar fields of the payload as one header and one value row.
    /// Certificates and arrays are left out; when the result has a `rows`
    /// array of objects, each of its rows becomes a line instead.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let payload = serde_json::to_value(&self.payload).expect("reports serialize");
        let mut scalars = Vec::new();
        flatten("", &payload, &mut scalars);
        let rows: Vec<&Map<String, Value>> = payload
            .pointer("/result/rows")
            .and_then(Value::as_array)
            .map(|a| a.iter().filter_map(Value::as_object).collect())
            .unwrap_or_default();

        let mut w = csv::Writer::from_writer(Vec::new());
        if rows.is_empty() {
            w.write_record(scalars.iter().map(|(k, _)| k.as_str()))?;
            w.write_record(scalars.iter().map(|(_, v)| v.as_str()))?;
        } else {
            let row_keys: Vec<&String> = rows[0].keys().collect();
            let header = scalars
                .iter()
                .map(|(k, _)| k.clone())
                .chain(row_keys.iter().map(|k| format!("row.{k}")));
            w.write_record(header)?;
            for row in &rows {
                let cells = scalars.iter().map(|(_, v)| v.clone()).chain(
                    row_keys
                        .iter()
                        .map(|k| row.get(*k).map(scalar_text).unwrap_or_default()),
                );
                w.write_record(cells)?;
            }
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Output(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                if k == "certificate" {
                    continue;
                }
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, child, out);
            }
        }
        Value::Array(_) => {}
        scalar => out.push((prefix.to_string(), scalar_text(scalar))),
    }
}
