//! Experiment configuration: a JSON file with flat per-command sections.
//!
//! The file maps command paths (`"qkd"`, `"broadcast.ptilde"`, …) to flat
//! parameter objects. Command-line flags always override file values; a
//! value missing from both falls back to the command's documented default.
//! The default seed for every stochastic command is 7.

use anyhow::{Context, Result};
use serde_json::{Map, Value};
use std::path::Path;

/// Default seed used by every stochastic command when neither the flag nor
/// the config file provides one.
pub const DEFAULT_SEED: u64 = 7;

/// One command's parameter section plus the resolved values, echoed into the
/// output table metadata.
#[derive(Debug, Clone, Default)]
pub struct ParamSource {
    section: Map<String, Value>,
    resolved: Map<String, Value>,
}

/// Loads the per-command section of a config file; `None` path or a file
/// without the section yields an empty source.
pub fn load_section(path: Option<&Path>, command: &str) -> Result<ParamSource> {
    let mut section = Map::new();
    if let Some(path) = path {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let root: Value = serde_json::from_str(&text)
            .with_context(|| format!("config file {} is not valid JSON", path.display()))?;
        let root = root
            .as_object()
            .context("config file root must be a JSON object keyed by command path")?;
        if let Some(Value::Object(map)) = root.get(command) {
            section = map.clone();
        } else if root.get(command).is_some() {
            anyhow::bail!("config section '{command}' must be a flat JSON object");
        }
    }
    Ok(ParamSource {
        section,
        resolved: Map::new(),
    })
}

impl ParamSource {
    /// Resolves a float parameter: flag, then config file, then default.
    pub fn f64(&mut self, key: &str, flag: Option<f64>, default: f64) -> Result<f64> {
        let value = match flag {
            Some(v) => v,
            None => match self.section.get(key) {
                Some(v) => v
                    .as_f64()
                    .with_context(|| format!("config key '{key}' must be a number"))?,
                None => default,
            },
        };
        self.resolved.insert(key.into(), json_number(value));
        Ok(value)
    }

    /// Resolves an unsigned integer parameter.
    pub fn u64(&mut self, key: &str, flag: Option<u64>, default: u64) -> Result<u64> {
        let value = match flag {
            Some(v) => v,
            None => match self.section.get(key) {
                Some(v) => v.as_u64().with_context(|| {
                    format!("config key '{key}' must be a non-negative integer")
                })?,
                None => default,
            },
        };
        self.resolved.insert(key.into(), Value::from(value));
        Ok(value)
    }

    /// Resolves a string-valued parameter (e.g. an enum choice).
    pub fn string(&mut self, key: &str, flag: Option<&str>, default: &str) -> Result<String> {
        let value = match flag {
            Some(v) => v.to_string(),
            None => match self.section.get(key) {
                Some(v) => v
                    .as_str()
                    .with_context(|| format!("config key '{key}' must be a string"))?
                    .to_string(),
                None => default.to_string(),
            },
        };
        self.resolved.insert(key.into(), Value::from(value.clone()));
        Ok(value)
    }

    /// The effective (post-resolution) configuration, for the metadata echo.
    pub fn echo(&self, command: &str, seed: Option<u64>) -> Value {
        let mut map = self.resolved.clone();
        map.insert("command".into(), Value::from(command));
        if let Some(seed) = seed {
            map.insert("seed".into(), Value::from(seed));
        }
        Value::Object(map)
    }
}

fn json_number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn flags_override_file_values_which_override_defaults() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        write!(file, r#"{{"qkd": {{"lambda": 3.0, "cx": 1.5}}}}"#).unwrap();
        let mut src = load_section(Some(file.path()), "qkd").unwrap();
        assert_eq!(src.f64("lambda", Some(2.0), 1.0).unwrap(), 2.0);
        assert_eq!(src.f64("cx", None, 0.0).unwrap(), 1.5);
        assert_eq!(src.f64("cp", None, 0.9).unwrap(), 0.9);
    }

    #[test]
    fn missing_section_falls_back_to_defaults() {
        let mut src = load_section(None, "qkd").unwrap();
        assert_eq!(src.u64("points", None, 10).unwrap(), 10);
    }

    #[test]
    fn non_object_section_is_rejected() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        write!(file, r#"{{"qkd": 4}}"#).unwrap();
        assert!(load_section(Some(file.path()), "qkd").is_err());
    }
}
