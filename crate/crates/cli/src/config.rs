//! Layered configuration and run manifests.
//!
//! A command's settings start from its defaults, are overlaid with a JSON
//! config file (a bare settings object or a previous run's manifest), and
//! finally with the flags given on the command line.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gqrs_core::csvio::write_atomic;
use gqrs_core::neuralnet::MLP_FORMAT_VERSION;
use gqrs_core::rng::hash_str;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

pub fn resolve<T, F>(command: &str, config: Option<&Path>, flags: &F) -> Result<T>
where
    T: Serialize + DeserializeOwned + Default,
    F: Serialize,
{
    let mut value = serde_json::to_value(T::default())?;
    if let Some(path) = config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let file: Value = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        merge(&mut value, settings_from(command, file)?);
    }
    merge(&mut value, serde_json::to_value(flags)?);
    serde_json::from_value(value).context("resolving configuration")
}

/// The settings object inside a manifest, or the file itself.
fn settings_from(command: &str, file: Value) -> Result<Value> {
    match (file.get("command"), file.get("config")) {
        (Some(Value::String(c)), Some(cfg)) => {
            if c != command {
                bail!("manifest was written by `{c}`, not `{command}`");
            }
            Ok(cfg.clone())
        }
        _ => Ok(file),
    }
}

/// Recursive object merge; non-object values in `over` replace `base`.
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
        (b, o) => *b = o,
    }
}

fn digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(format!("{:016x}", hash_str(&String::from_utf8_lossy(&bytes))))
}

pub struct Manifest {
    command: &'static str,
    config: Value,
    inputs: Vec<PathBuf>,
    artifacts: Vec<PathBuf>,
}

impl Manifest {
    pub fn new(command: &'static str, config: &impl Serialize) -> Result<Self> {
        Ok(Self { command, config: serde_json::to_value(config)?, inputs: vec![], artifacts: vec![] })
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    pub fn artifact(&mut self, path: &Path) {
        self.artifacts.push(path.to_path_buf());
    }

    pub fn write(&self, path: &Path, threads: usize) -> Result<()> {
        let files = |paths: &[PathBuf]| -> Result<Vec<Value>> {
            paths.iter().map(|p| Ok(json!({ "path": p, "fnv1a64": digest(p)? }))).collect()
        };
        let doc = json!({
            "tool": "gqrs",
            "version": env!("CARGO_PKG_VERSION"),
            "mlp_format_version": MLP_FORMAT_VERSION,
            "command": self.command,
            "threads": threads,
            "config": self.config,
            "inputs": files(&self.inputs)?,
            "artifacts": files(&self.artifacts)?,
        });
        let text = serde_json::to_string_pretty(&doc)? + "\n";
        write_atomic(path, text.as_bytes()).with_context(|| format!("writing manifest {}", path.display()))
    }
}

/// Where the manifest goes: the explicit path, or `manifest.json` in `dir`.
pub fn manifest_path(explicit: Option<&Path>, dir: &Path) -> PathBuf {
    explicit.map(Path::to_path_buf).unwrap_or_else(|| dir.join("manifest.json"))
}

pub fn parent_dir(file: &Path) -> PathBuf {
    match file.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Default, Serialize, Deserialize, PartialEq)]
    #[serde(default)]
    struct Settings {
        n: usize,
        name: String,
        inner: Inner,
    }

    #[derive(Debug, Default, Serialize, Deserialize, PartialEq)]
    #[serde(default)]
    struct Inner {
        a: f64,
        b: f64,
    }

    #[derive(Serialize)]
    struct Flags {
        #[serde(skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        inner: Value,
    }

    #[test]
    fn flags_override_file_override_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(&cfg, r#"{"n": 5, "name": "file", "inner": {"a": 1.0, "b": 2.0}}"#).unwrap();
        let flags = Flags { n: Some(9), inner: json!({"b": 3.0}) };
        let s: Settings = resolve("x", Some(&cfg), &flags).unwrap();
        assert_eq!(s, Settings { n: 9, name: "file".into(), inner: Inner { a: 1.0, b: 3.0 } });
        let s: Settings = resolve("x", None, &Flags { n: None, inner: json!({}) }).unwrap();
        assert_eq!(s, Settings::default());
    }

    #[test]
    fn manifests_are_accepted_as_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("manifest.json");
        std::fs::write(&cfg, r#"{"command": "x", "config": {"n": 4}}"#).unwrap();
        let flags = Flags { n: None, inner: json!({}) };
        let s: Settings = resolve("x", Some(&cfg), &flags).unwrap();
        assert_eq!(s.n, 4);
        assert!(resolve::<Settings, _>("y", Some(&cfg), &flags).is_err());
    }
}
