//! Reading inputs and writing artifacts with provenance metadata.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use pompom_core::Caps;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct InputRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub overrides: BTreeMap<String, String>,
    pub caps: Caps,
    pub inputs: Vec<InputRecord>,
    pub params: BTreeMap<String, Value>,
}

#[derive(Debug, Serialize)]
struct Envelope<'a> {
    kind: &'a str,
    metadata: &'a Metadata,
    data: &'a Value,
}

/// Tracks every file read so that artifacts can name their inputs.
pub struct Context {
    pub meta: Metadata,
    pub output: Option<PathBuf>,
}

impl Context {
    pub fn new(command: String, seed: u64, overrides: BTreeMap<String, String>, caps: Caps, output: Option<PathBuf>) -> Self {
        Context {
            meta: Metadata {
                tool: "pompom",
                version: env!("CARGO_PKG_VERSION"),
                command,
                seed,
                overrides,
                caps,
                inputs: Vec::new(),
                params: BTreeMap::new(),
            },
            output,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("parameters serialize");
        self.meta.params.insert(key.to_string(), v);
    }

    /// Reads a JSON file, unwrapping a previously written artifact to its
    /// `data` payload.
    pub fn read<T: DeserializeOwned>(&mut self, path: &Path) -> Result<T, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        self.meta.inputs.push(InputRecord {
            path: path.display().to_string(),
            sha256: hex(&Sha256::digest(&bytes)),
        });
        let mut v: Value = serde_json::from_slice(&bytes)
            .map_err(|e| CliError::Validation(format!("{}: invalid JSON: {e}", path.display())))?;
        if let Value::Object(m) = &mut v {
            if m.contains_key("metadata") && m.contains_key("kind") {
                if let Some(data) = m.remove("data") {
                    v = data;
                }
            }
        }
        // Transform artifacts carry the formula next to their diagnostics.
        let nested = v.get("formula").cloned();
        serde_json::from_value(v).or_else(|e| {
            nested
                .and_then(|f| serde_json::from_value(f).ok())
                .ok_or_else(|| CliError::Validation(format!("{}: {e}", path.display())))
        })
    }

    pub fn write(&self, kind: &str, data: impl Serialize) -> Result<(), CliError> {
        let data = serde_json::to_value(data).map_err(|e| CliError::Validation(e.to_string()))?;
        let env = Envelope {
            kind,
            metadata: &self.meta,
            data: &data,
        };
        let mut text = serde_json::to_string_pretty(&env).expect("artifacts serialize");
        text.push('\n');
        match &self.output {
            Some(p) => fs::write(p, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
