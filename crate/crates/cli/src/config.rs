//! Layered run configuration: command-line flags over a config file over
//! built-in defaults. Layers are merged as JSON objects and then
//! deserialized into the typed config of each subcommand.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use crate::Failure;

pub const SEED_ENV: &str = "TMES_SEED";

/// Recursively overlays `over` onto `base`. Objects merge key by key; any
/// other value replaces what was there.
pub fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Loads a config layer from `path`. Accepts a plain JSON object, a prior
/// JSON output (its `config` or `params` member), or a prior CSV output (its
/// `# config:` metadata line).
pub fn load(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| Failure::Usage(format!("{}: invalid JSON: {e}", path.display())))?;
        for key in ["config", "params"] {
            if let Some(inner) = v.get(key).filter(|c| c.is_object()) {
                return Ok(inner.clone());
            }
        }
        return Ok(v);
    }
    for line in text.lines() {
        if !line.starts_with('#') {
            break;
        }
        if let Some(json) = line.strip_prefix("# config: ") {
            return serde_json::from_str(json)
                .map_err(|e| Failure::Usage(format!("{}: invalid config line: {e}", path.display())));
        }
    }
    Err(Failure::Usage(format!(
        "{}: neither a JSON config nor a file with a `# config:` line",
        path.display()
    )))
}

/// Builds a JSON object from `(key, value)` pairs, skipping unset flags.
#[derive(Default)]
pub struct Overlay(Map<String, Value>);

impl Overlay {
    pub fn set<T: serde::Serialize>(&mut self, key: &str, value: Option<T>) -> &mut Self {
        if let Some(v) = value {
            self.0.insert(key.to_string(), serde_json::to_value(v).expect("serializable flag"));
        }
        self
    }

    pub fn into_value(self) -> Value {
        Value::Object(self.0)
    }
}

/// Merges defaults, the optional config file and the flag overlay.
pub fn layered(defaults: Value, file: Option<&Path>, flags: Value) -> Result<Value, Failure> {
    let mut v = defaults;
    if let Some(p) = file {
        merge(&mut v, load(p)?);
    }
    merge(&mut v, flags);
    Ok(v)
}

/// Fills in `seed` from the environment or from entropy when no layer set it.
pub fn ensure_seed(v: &mut Value) -> Result<(), Failure> {
    let obj = v.as_object_mut().expect("config is an object");
    if obj.get("seed").is_some_and(|s| !s.is_null()) {
        return Ok(());
    }
    let seed = match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse::<u64>()
            .map_err(|_| Failure::Usage(format!("{SEED_ENV}=`{s}` is not a 64-bit unsigned integer")))?,
        Err(_) => {
            let s: u64 = rand::random();
            eprintln!("seed: {s}");
            s
        }
    };
    obj.insert("seed".into(), seed.into());
    Ok(())
}

pub fn resolve<T: DeserializeOwned>(v: Value) -> Result<T, Failure> {
    serde_json::from_value(v).map_err(|e| Failure::Usage(format!("invalid configuration: {e}")))
}
