use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Failure;

/// Provenance record written next to every artifact as
/// `<artifact>.manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub subcommand: String,
    pub version: String,
    /// SHA-256 of the canonical JSON of `config`.
    pub config_hash: String,
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    /// Input files with their SHA-256.
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub started_unix: u64,
    pub finished_unix: u64,
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sidecar_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub struct ManifestBuilder {
    manifest: RunManifest,
}

impl ManifestBuilder {
    pub fn new(argv: &[String], subcommand: &str) -> Self {
        Self {
            manifest: RunManifest {
                command_line: argv.to_vec(),
                subcommand: subcommand.to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                config_hash: sha256_hex(b"null"),
                config: serde_json::Value::Null,
                seeds: BTreeMap::new(),
                inputs: BTreeMap::new(),
                outputs: Vec::new(),
                started_unix: unix_now(),
                finished_unix: 0,
            },
        }
    }

    pub fn config<C: Serialize>(&mut self, config: &C) -> Result<(), Failure> {
        let value = serde_json::to_value(config)?;
        self.manifest.config_hash = sha256_hex(serde_json::to_string(&value)?.as_bytes());
        self.manifest.config = value;
        Ok(())
    }

    pub fn seed(&mut self, name: &str, seed: u64) {
        self.manifest.seeds.insert(name.to_string(), seed);
    }

    pub fn input(&mut self, path: &Path, bytes: &[u8]) {
        self.manifest
            .inputs
            .insert(path.display().to_string(), sha256_hex(bytes));
    }

    /// Writes `bytes` to `path` and records it as an output.
    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<(), Failure> {
        fs::write(path, bytes).map_err(|e| Failure::io(path, e))?;
        self.manifest.outputs.push(path.display().to_string());
        Ok(())
    }

    /// Writes the sidecar of every recorded output.
    pub fn finish(mut self) -> Result<RunManifest, Failure> {
        self.manifest.finished_unix = unix_now();
        let json = serde_json::to_string_pretty(&self.manifest)?;
        for out in &self.manifest.outputs {
            let side = sidecar_path(Path::new(out));
            fs::write(&side, &json).map_err(|e| Failure::io(&side, e))?;
        }
        Ok(self.manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn sidecar_appends_suffix() {
        assert_eq!(sidecar_path(Path::new("out/d.jsonl")), PathBuf::from("out/d.jsonl.manifest.json"));
    }
}
