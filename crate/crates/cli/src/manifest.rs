//! Run manifests and all-or-nothing output writing.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Identifies the run that produced a set of files.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub args: Vec<String>,
    /// First 64 bits of the SHA-256 of all inputs, as hex.
    pub config_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub version: String,
    /// Unix seconds; both pinned to `SOURCE_DATE_EPOCH` when it is set.
    pub started_at: u64,
    pub finished_at: u64,
}

#[derive(Serialize)]
struct OutputEntry<'a> {
    file: &'a str,
    sha256: String,
}

#[derive(Serialize)]
struct ManifestFile<'a> {
    #[serde(flatten)]
    manifest: &'a Manifest,
    outputs: Vec<OutputEntry<'a>>,
}

fn now() -> u64 {
    if let Some(epoch) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.parse().ok()) {
        return epoch;
    }
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Hashes the inputs of a run, each prefixed by its length so that
/// concatenation boundaries matter.
pub fn config_hash(inputs: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for input in inputs {
        h.update((input.len() as u64).to_le_bytes());
        h.update(input);
    }
    hex(&h.finalize()[..8])
}

impl Manifest {
    pub fn start(command: &str, inputs: &[&[u8]], seed: Option<u64>) -> Self {
        let t = now();
        Manifest {
            command: command.to_string(),
            args: std::env::args().skip(1).collect(),
            config_hash: config_hash(inputs),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: t,
            finished_at: t,
        }
    }

    pub fn finish(&mut self) {
        self.finished_at = now();
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("manifest serializes")
    }
}

/// Files produced by a command, held in memory until everything succeeded.
#[derive(Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, name: &str, contents: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), contents.into()));
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut text = serde_json::to_string_pretty(value).expect("output serializes");
        text.push('\n');
        self.add(name, text);
    }

    /// Writes every file plus `manifest.json` into `dir`.
    pub fn write(self, dir: &Path, manifest: &mut Manifest) -> Result<Vec<PathBuf>, CliError> {
        manifest.finish();
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let mut written = Vec::new();
        let mut entries = Vec::new();
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
            entries.push(OutputEntry {
                file: name,
                sha256: hex(&Sha256::digest(bytes)),
            });
            written.push(path);
        }
        let file = ManifestFile {
            manifest,
            outputs: entries,
        };
        let mut text = serde_json::to_string_pretty(&file).expect("manifest serializes");
        text.push('\n');
        let path = dir.join("manifest.json");
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        written.push(path);
        Ok(written)
    }
}
