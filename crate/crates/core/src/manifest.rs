use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Resolved configuration and provenance of one CLI invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub timestamp: String,
    pub master_seed: Option<u64>,
    /// Every setting after defaults, config file, and flags were merged.
    pub config: serde_json::Value,
    pub outputs: Vec<OutputFile>,
    /// SHA-256 over tool, version, command, seed, and config. The
    /// timestamp and outputs are excluded, so identical runs share a hash.
    pub hash: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub path: PathBuf,
    pub sha256: String,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

impl RunManifest {
    pub fn new(command: &str, master_seed: Option<u64>, config: serde_json::Value) -> Self {
        let version = env!("CARGO_PKG_VERSION");
        let keyed = serde_json::json!({
            "tool": "ncnet",
            "version": version,
            "command": command,
            "master_seed": master_seed,
            "config": config,
        });
        Self {
            tool: "ncnet",
            version,
            command: command.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            master_seed,
            config,
            outputs: Vec::new(),
            hash: sha256_hex(keyed.to_string().as_bytes()),
        }
    }

    /// Writes `bytes` to `path` and lists it with its digest.
    pub fn write_output(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        std::fs::write(path, bytes)?;
        self.outputs.push(OutputFile {
            path: path.to_path_buf(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}
