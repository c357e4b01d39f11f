//! Run manifests and lossless text output.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::MapConfig;
use crate::error::{HenonError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub args: Vec<String>,
    pub config: Vec<(String, String)>,
    pub config_file: Option<String>,
    pub output: Option<String>,
    pub seed: u64,
}

impl RunManifest {
    pub fn new(
        subcommand: &str,
        args: Vec<String>,
        cfg: &MapConfig,
        config_file: Option<String>,
        output: Option<String>,
    ) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            args,
            config: cfg.to_kv(),
            config_file,
            output,
            seed: cfg.seed,
        }
    }

    /// Hex SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("manifest serialises");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// `{:.16e}`: 17 significant digits, `.` as decimal separator.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize, out: &mut String| out.extend(std::iter::repeat_n(' ', n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().unwrap_or(f64::NAN);
                if x.is_finite() {
                    out.push_str(&format!("{x:.16e}"));
                } else {
                    out.push_str("null");
                }
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string serialises")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            if items.iter().all(|i| !i.is_array() && !i.is_object()) {
                out.push('[');
                for (k, i) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_value(i, indent, out);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (k, i) in items.iter().enumerate() {
                pad(indent + 2, out);
                write_value(i, indent + 2, out);
                if k + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(indent, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            let n = map.len();
            for (k, (key, val)) in map.iter().enumerate() {
                pad(indent + 2, out);
                out.push_str(&serde_json::to_string(key).expect("key serialises"));
                out.push_str(": ");
                write_value(val, indent + 2, out);
                if k + 1 < n {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(indent, out);
            out.push('}');
        }
    }
}

/// Pretty JSON with every float written to 17 significant digits; non-finite floats become `null`.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| HenonError::Numerical(format!("serialisation failed: {e}")))?;
    let mut out = String::new();
    write_value(&v, 0, &mut out);
    out.push('\n');
    Ok(out)
}

/// JSON document `{"manifest": ..., "manifest_hash": ..., "result": ...}`.
pub fn json_document<T: Serialize>(manifest: &RunManifest, result: &T) -> Result<String> {
    #[derive(Serialize)]
    struct Doc<'a, T: Serialize> {
        manifest: &'a RunManifest,
        manifest_hash: String,
        result: &'a T,
    }
    to_json(&Doc { manifest, manifest_hash: manifest.hash(), result })
}

/// CSV text headed by a `# manifest_hash=` comment line.
pub fn csv_document(manifest: &RunManifest, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = format!("# manifest_hash={}\n", manifest.hash());
    out.push_str(&header.join(","));
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        let s = to_json(&vec![0.1f64, 1.0 / 3.0]).unwrap();
        assert_eq!(s, "[1.0000000000000001e-1, 3.3333333333333331e-1]\n");
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![0.1, 1.0 / 3.0]);
    }

    #[test]
    fn hash_tracks_config() {
        let mut c = MapConfig::default();
        let a = RunManifest::new("selfcheck", vec![], &c, None, None);
        c.seed += 1;
        let b = RunManifest::new("selfcheck", vec![], &c, None, None);
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
