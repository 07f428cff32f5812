//! Deterministic JSON output.
//!
//! All artifacts are written through [`to_canonical_string`]: object keys
//! sorted, two-space indentation, and every floating-point number printed
//! with 17 significant digits so values reload bit-for-bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                write!(out, "{u}").unwrap();
            } else if let Some(i) = n.as_i64() {
                write!(out, "{i}").unwrap();
            } else {
                out.push_str(&format_f64(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).unwrap()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // Arrays of scalars stay on one line.
            if items.iter().all(|i| !i.is_array() && !i.is_object()) {
                out.push('[');
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, item, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                pad(out, indent + 2);
                write_value(out, item, indent + 2);
                if k + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                pad(out, indent + 2);
                out.push_str(&serde_json::to_string(key).unwrap());
                out.push_str(": ");
                write_value(out, item, indent + 2);
                if k + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

pub fn to_canonical_string<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

/// SHA-256 of the canonical serialization, as lowercase hex.
pub fn fingerprint<T: Serialize>(value: &T) -> Result<String> {
    Ok(crate::resources::sha256_hex(&to_canonical_string(value)?))
}

/// Wrapper carrying the artifact kind and format version.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub format: String,
    pub version: u32,
    #[serde(flatten)]
    pub body: T,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
}

pub fn write_artifact<T: Serialize>(path: &Path, format: &str, body: &T) -> Result<()> {
    let text = artifact_string(format, body)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn artifact_string<T: Serialize>(format: &str, body: &T) -> Result<String> {
    to_canonical_string(&Envelope {
        format: format.to_string(),
        version: FORMAT_VERSION,
        body,
    })
}

pub fn parse_artifact<T: DeserializeOwned>(text: &str, format: &str) -> Result<T> {
    let header: Header = serde_json::from_str(text)?;
    if header.format != format {
        return Err(Error::Config(format!(
            "expected a `{format}` document, found `{}`",
            header.format
        )));
    }
    if header.version != FORMAT_VERSION {
        return Err(Error::Version {
            found: header.version,
            expected: FORMAT_VERSION,
        });
    }
    let env: Envelope<T> = serde_json::from_str(text)?;
    Ok(env.body)
}

pub fn read_artifact<T: DeserializeOwned>(path: &Path, format: &str) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_artifact(&text, format)
}
