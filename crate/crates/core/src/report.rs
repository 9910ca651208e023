//! Report serialization helpers: JSON documents with every scalar rendered
//! as a full round-trip decimal string, and atomic file writes.

use crate::error::Result;
use serde::Serialize;
use serde_json::Value;
use std::path::Path;

/// Recursively rewrites every JSON number into its shortest round-trip
/// decimal string. Keeps reports byte-stable across serde versions and makes
/// the scalars safe for exact regression comparison.
pub fn stringify_numbers(v: Value) -> Value {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Value::String(format!("{i}"))
            } else if let Some(u) = n.as_u64() {
                Value::String(format!("{u}"))
            } else if let Some(f) = n.as_f64() {
                Value::String(format!("{f}"))
            } else {
                Value::String(n.to_string())
            }
        }
        Value::Array(xs) => Value::Array(xs.into_iter().map(stringify_numbers).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, x)| (k, stringify_numbers(x))).collect())
        }
        other => other,
    }
}

/// Serializes a report under a versioned envelope:
/// `{"schema": "<name>/1", ...fields}` with decimal-string scalars.
pub fn to_report_json<T: Serialize>(schema: &str, payload: &T) -> Result<String> {
    let value = serde_json::to_value(payload)?;
    let mut value = stringify_numbers(value);
    if let Value::Object(map) = &mut value {
        map.insert("schema".into(), Value::String(format!("{schema}/1")));
    } else {
        let mut map = serde_json::Map::new();
        map.insert("schema".into(), Value::String(format!("{schema}/1")));
        map.insert("report".into(), value);
        value = Value::Object(map);
    }
    Ok(serde_json::to_string_pretty(&value)?)
}

/// Writes through a temporary file in the same directory followed by a
/// rename, so readers never observe partial content.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into()),
        std::process::id()
    ));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_become_round_trip_strings() {
        let v = serde_json::json!({"a": 0.1, "b": [1, 2.5], "c": {"d": 1e-8}});
        let s = stringify_numbers(v);
        assert_eq!(s["a"], "0.1");
        assert_eq!(s["b"][0], "1");
        assert_eq!(s["b"][1], "2.5");
        // shortest round-trip rendering parses back to the same bits
        let parsed: f64 = s["c"]["d"].as_str().unwrap().parse().unwrap();
        assert_eq!(parsed, 1e-8);
    }

    #[test]
    fn report_envelope_carries_schema() {
        #[derive(Serialize)]
        struct Demo {
            x: f64,
        }
        let s = to_report_json("demo", &Demo { x: 0.5 }).unwrap();
        let v: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["schema"], "demo/1");
        assert_eq!(v["x"], "0.5");
    }

    #[test]
    fn atomic_write_creates_file() {
        let dir = std::env::temp_dir().join(format!("lrll-report-test-{}", std::process::id()));
        let path = dir.join("x.json");
        write_atomic(&path, b"{}").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"{}");
        std::fs::remove_dir_all(&dir).ok();
    }
}
