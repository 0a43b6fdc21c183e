//! Output files, their digests and the run manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the resolved config as compact JSON.
    pub config_digest: String,
    pub seed: u64,
    pub artifact_version: String,
    /// Paths relative to the output directory, in write order.
    pub outputs: Vec<String>,
    pub output_digests: BTreeMap<String, String>,
}

/// Writes files under one directory and remembers what was written.
pub struct Outputs {
    dir: PathBuf,
    written: Vec<(String, String)>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, bytes)?;
        self.written.push((rel.to_string(), sha256_hex(bytes)));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(rel, &bytes)
    }

    pub fn write_csv<T: Serialize>(&mut self, rel: &str, rows: &[T]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
        self.write(rel, &bytes)
    }

    /// Writes `value` as JSON, or as a two-column `key,value` CSV of its
    /// flattened leaves.
    pub fn write_report<T: Serialize>(&mut self, stem: &str, value: &T, format: Format) -> Result<(), CliError> {
        match format {
            Format::Json => self.write_json(&format!("{stem}.json"), value),
            Format::Csv => {
                let mut rows = Vec::new();
                flatten("", &serde_json::to_value(value)?, &mut rows);
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["key", "value"])?;
                for (k, v) in rows {
                    w.write_record([k, v])?;
                }
                let bytes = w.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
                self.write(&format!("{stem}.csv"), &bytes)
            }
        }
    }

    pub fn finish(mut self, command: &str, config_digest: String, seed: u64) -> Result<RunManifest, CliError> {
        let manifest = RunManifest {
            command: command.to_string(),
            config_digest,
            seed,
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: self.written.iter().map(|(p, _)| p.clone()).collect(),
            output_digests: self.written.drain(..).collect(),
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        std::fs::write(self.dir.join(MANIFEST_FILE), bytes)?;
        Ok(manifest)
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}
