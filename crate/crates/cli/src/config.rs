//! Config resolution: preset or default, then the JSON file, then flags.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

/// A flag override: JSON pointer-style path (`"template/eps"`) and the value, if given.
pub type Override = (&'static str, Option<Value>);

pub fn opt<T: Into<Value>>(path: &'static str, v: Option<T>) -> Override {
    (path, v.map(Into::into))
}

pub fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Runtime(format!("serialization failed: {e}")))
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, p) => *b = p,
    }
}

fn set_path(root: &mut Value, path: &str, value: Value) {
    let mut cur = root;
    let parts: Vec<&str> = path.split('/').collect();
    for (i, part) in parts.iter().enumerate() {
        if !cur.is_object() {
            *cur = Value::Object(Map::new());
        }
        let obj = cur.as_object_mut().expect("just made an object");
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return;
        }
        cur = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
}

pub fn read_config_file(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("config {} is not valid JSON: {e}", path.display())))?;
    if !value.is_object() {
        return Err(CliError::Config(format!("config {} must be a JSON object", path.display())));
    }
    Ok(value)
}

/// Merges `base`, the optional file and the overrides, then deserializes.
pub fn resolve<T: DeserializeOwned>(
    base: Value,
    file: Option<&Path>,
    overrides: &[Override],
) -> Result<T, CliError> {
    let mut merged = base;
    if let Some(path) = file {
        merge(&mut merged, read_config_file(path)?);
    }
    for (path, value) in overrides {
        if let Some(v) = value {
            set_path(&mut merged, path, v.clone());
        }
    }
    serde_json::from_value(merged).map_err(|e| CliError::Config(e.to_string()))
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn sorted_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let value = to_value(v)?;
    serde_json::to_string_pretty(&value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Runtime(format!("serialization failed: {e}")))
}

/// SHA-256 of the compact, key-sorted JSON form.
pub fn digest<T: Serialize>(v: &T) -> Result<String, CliError> {
    let value = to_value(v)?;
    let compact = serde_json::to_string(&value).map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(hex::encode(Sha256::digest(compact.as_bytes())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn merge_is_deep() {
        let mut base = json!({"a": {"b": 1, "c": 2}, "d": 3});
        merge(&mut base, json!({"a": {"c": 5}, "e": 6}));
        assert_eq!(base, json!({"a": {"b": 1, "c": 5}, "d": 3, "e": 6}));
    }

    #[test]
    fn overrides_create_paths() {
        let mut v = json!({});
        set_path(&mut v, "template/params/n", json!(3));
        assert_eq!(v, json!({"template": {"params": {"n": 3}}}));
    }

    #[test]
    fn digest_ignores_key_order() {
        let a: Value = serde_json::from_str(r#"{"x": 1, "y": 2}"#).unwrap();
        let b: Value = serde_json::from_str(r#"{"y": 2, "x": 1}"#).unwrap();
        assert_eq!(digest(&a).unwrap(), digest(&b).unwrap());
        assert_eq!(digest(&a).unwrap().len(), 64);
    }
}
