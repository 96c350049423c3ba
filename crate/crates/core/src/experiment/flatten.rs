use serde_json::Value;

use crate::error::{Error, Result};

/// Leaves of a JSON tree keyed by dotted path; array elements use their
/// index as the path segment. Numbers keep their JSON spelling.
pub fn flatten_json(value: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    walk(value, String::new(), &mut out);
    out
}

fn walk(value: &Value, path: String, out: &mut Vec<(String, String)>) {
    let child = |key: &str| {
        if path.is_empty() {
            key.to_string()
        } else {
            format!("{path}.{key}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                walk(v, child(k), out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                walk(v, child(&i.to_string()), out);
            }
        }
        Value::Null => out.push((path, String::new())),
        Value::String(s) => out.push((path, s.clone())),
        Value::Bool(b) => out.push((path, b.to_string())),
        Value::Number(n) => out.push((path, n.to_string())),
    }
}

/// A header row of dotted paths and one row of values.
pub fn to_csv(value: &Value) -> Result<String> {
    let cells = flatten_json(value);
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Invariant(format!("csv encoding failed: {e}"));
    w.write_record(cells.iter().map(|(k, _)| k.as_str())).map_err(io)?;
    w.write_record(cells.iter().map(|(_, v)| v.as_str())).map_err(io)?;
    let bytes = w.into_inner().map_err(|e| Error::Invariant(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Invariant(e.to_string()))
}
