//! Flag and config-file ingestion: list and range parsing, and the merge of
//! a JSON run configuration over command-line values.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

pub type ConfigResult<T> = std::result::Result<T, ConfigError>;

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

pub fn parse_f64(s: &str) -> ConfigResult<f64> {
    s.trim().parse::<f64>().map_err(|_| bad(format!("not a number: {s:?}")))
}

/// Comma-separated list, or a single `start:stop:step` range.
pub fn parse_grid(s: &str) -> ConfigResult<Vec<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Err(bad("empty value list"));
    }
    if s.contains(':') {
        return parse_range(s);
    }
    s.split(',').map(parse_f64).collect()
}

/// `start:stop:step`; a node overshooting `stop` by less than half a step is
/// clamped onto it.
pub fn parse_range(s: &str) -> ConfigResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, h] = parts.as_slice() else {
        return Err(bad(format!("range {s:?} must look like start:stop:step")));
    };
    let (a, b, h) = (parse_f64(a)?, parse_f64(b)?, parse_f64(h)?);
    if !(h > 0.0 && h.is_finite() && a.is_finite() && b.is_finite()) {
        return Err(bad(format!("range {s:?} needs a positive step and finite bounds")));
    }
    if b < a {
        return Err(bad(format!("range {s:?} has stop below start")));
    }
    let n = ((b - a) / h + 0.5 - 1e-9).floor().max(0.0) as usize;
    if n > 1_000_000 {
        return Err(bad(format!("range {s:?} has too many nodes")));
    }
    Ok((0..=n).map(|k| (a + k as f64 * h).min(b)).collect())
}

pub fn parse_usize_list(s: &str) -> ConfigResult<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| bad(format!("not a nonnegative integer: {t:?}"))))
        .collect()
}

pub fn parse_pair(s: &str) -> ConfigResult<(f64, f64)> {
    let v: Vec<f64> = s.split(',').map(parse_f64).collect::<ConfigResult<_>>()?;
    match v.as_slice() {
        [x, y] => Ok((*x, *y)),
        _ => Err(bad(format!("expected two comma-separated numbers, got {s:?}"))),
    }
}

/// Top-level layout of a configuration file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub command: Option<String>,
    #[serde(default)]
    pub parameters: Map<String, Value>,
    #[serde(default)]
    pub output: Map<String, Value>,
    #[serde(default)]
    pub tolerances: Map<String, Value>,
}

pub fn load(path: &Path) -> ConfigResult<RunConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|e| bad(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| bad(format!("config {}: {e}", path.display())))
}

fn normalize_key(k: &str) -> String {
    k.replace('_', "-")
}

/// Config values that target a string-typed flag may be given as numbers
/// or arrays; they are rendered in flag syntax.
fn coerce(target: &Value, v: Value) -> Value {
    match (target, v) {
        (Value::String(_) | Value::Null, Value::Array(items)) => Value::String(
            items
                .iter()
                .map(|i| match i {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
        ),
        (Value::String(_), Value::Number(n)) => Value::String(n.to_string()),
        (_, v) => v,
    }
}

/// Overlays `overrides` on the serialized form of `base`. Keys unknown to
/// `base` are rejected.
pub fn merge<T: Serialize + DeserializeOwned>(base: &T, overrides: &Map<String, Value>, section: &str) -> ConfigResult<T> {
    let mut value = serde_json::to_value(base).map_err(|e| bad(e.to_string()))?;
    let obj = value.as_object_mut().ok_or_else(|| bad("arguments do not form an object"))?;
    for (k, v) in overrides {
        let key = normalize_key(k);
        let Some(slot) = obj.get_mut(&key) else {
            return Err(bad(format!("unknown key {k:?} in config section {section:?}")));
        };
        *slot = coerce(slot, v.clone());
    }
    serde_json::from_value(value).map_err(|e| bad(format!("config section {section:?}: {e}")))
}
