//! Merging of an optional TOML config with command-line flags.

use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

/// Invalid flag or config value; reported with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Reads the `[command]` table of a TOML file; a missing table is empty.
pub fn load_table(path: &Path, command: &str) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let doc: toml::Table = toml::from_str(&text)
        .map_err(|e| usage(format!("config {}: {e}", path.display())))?;
    match doc.get(command) {
        None => Ok(Map::new()),
        Some(toml::Value::Table(t)) => match serde_json::to_value(t)? {
            Value::Object(m) => Ok(m),
            _ => unreachable!(),
        },
        Some(_) => Err(usage(format!("config entry [{command}] must be a table"))),
    }
}

/// Flags given on the command line replace the config's values.
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, table: Map<String, Value>) -> Result<T> {
    let mut merged = table;
    if let Value::Object(given) = serde_json::to_value(flags)? {
        for (k, v) in given {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| usage(format!("config: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::SolitaryArgs;

    #[test]
    fn flags_override_config() {
        let table: toml::Table = toml::from_str("lambda = 0.3\nwindow = 8.0\ntol = 1e-9").unwrap();
        let table = match serde_json::to_value(table).unwrap() {
            Value::Object(m) => m,
            _ => unreachable!(),
        };
        let flags = SolitaryArgs {
            lambda: Some(0.5),
            ..Default::default()
        };
        let m = merge(&flags, table).unwrap();
        assert_eq!(m.lambda, Some(0.5));
        assert_eq!(m.window, Some(8.0));
        assert_eq!(m.solver.tol, Some(1e-9));
    }

    #[test]
    fn bad_types_are_usage_errors() {
        let mut table = Map::new();
        table.insert("lambda".into(), Value::String("half".into()));
        let e = merge(&SolitaryArgs::default(), table).unwrap_err();
        assert!(e.downcast_ref::<UsageError>().is_some());
    }
}
