//! Run manifests: enough recorded configuration to replay a run and verify
//! its outputs byte for byte.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
pub struct OutputDigest {
    pub path: PathBuf,
    pub bytes: usize,
    pub sha256: String,
}

/// Written next to the primary output as `<output>.manifest.json`.
#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    /// The full invocation; replaying it reproduces the outputs.
    pub argv: Vec<String>,
    pub version: String,
    /// Effective configuration after defaults were applied.
    pub config: serde_json::Value,
    pub duration_ms: u128,
    pub outputs: Vec<OutputDigest>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, duration_ms: u128) -> Self {
        RunManifest {
            command: command.to_string(),
            argv: std::env::args().collect(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            duration_ms,
            outputs: Vec::new(),
        }
    }

    pub fn record_output(&mut self, path: &Path, contents: &[u8]) {
        self.outputs.push(OutputDigest {
            path: path.to_path_buf(),
            bytes: contents.len(),
            sha256: hex::encode(Sha256::digest(contents)),
        });
    }

    pub fn manifest_path(output: &Path) -> PathBuf {
        let mut name = output.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        output.with_file_name(name)
    }

    pub fn write(&self, output: &Path) -> std::io::Result<()> {
        let path = Self::manifest_path(output);
        let mut body = serde_json::to_vec_pretty(self)?;
        body.push(b'\n');
        std::fs::write(path, body)
    }
}
