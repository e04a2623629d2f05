//! Run manifests: configuration echo, seeds, output inventory with content
//! hashes, and timings.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const MANIFEST_SCHEMA: &str = "manifest/1";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the manifest's directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
    pub schema: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Timings {
    pub wall_seconds: f64,
    pub steps: u64,
    pub seconds_per_step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub command: String,
    pub code_version: String,
    pub config: BTreeMap<String, String>,
    pub seeds: Vec<u64>,
    pub files: Vec<FileEntry>,
    /// SHA-256 over the sorted `path:sha256` lines of `files`.
    pub inventory_hash: String,
    pub timings: Timings,
    pub summary: serde_json::Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn new(command: &str, config: BTreeMap<String, String>, seeds: Vec<u64>) -> Self {
        Self {
            schema: MANIFEST_SCHEMA.into(),
            command: command.into(),
            code_version: env!("CARGO_PKG_VERSION").into(),
            config,
            seeds,
            files: Vec::new(),
            inventory_hash: String::new(),
            timings: Timings::default(),
            summary: serde_json::Value::Null,
        }
    }

    /// Hashes `path` (relative to `root`) into the inventory.
    pub fn add_file(&mut self, root: &Path, rel: &str, schema: Option<&str>) -> Result<()> {
        let bytes = std::fs::read(root.join(rel))?;
        self.files.push(FileEntry {
            path: rel.into(),
            sha256: sha256_hex(&bytes),
            bytes: bytes.len() as u64,
            schema: schema.map(str::to_string),
        });
        Ok(())
    }

    pub fn finalize(&mut self) {
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        let lines: String = self.files.iter().map(|f| format!("{}:{}\n", f.path, f.sha256)).collect();
        self.inventory_hash = sha256_hex(lines.as_bytes());
    }

    pub fn write(&mut self, dir: &Path) -> Result<()> {
        self.finalize();
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(dir.join(MANIFEST_FILE), text + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text).map_err(std::io::Error::other)?)
    }
}
