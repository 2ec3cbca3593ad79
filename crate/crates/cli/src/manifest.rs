//! Run manifests: every output directory carries one, and every output
//! file references it.  Reruns with identical inputs and arguments
//! produce byte-identical data files; only the manifest timestamp
//! changes.

use crate::errors::{io_context, CliResult};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub argv: Vec<String>,
    /// SHA-256 over the argument vector and the bytes of every input
    /// file, in order.
    pub config_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tool_version: String,
    pub timestamp_unix: u64,
}

impl RunManifest {
    pub fn new(command: &str, input_paths: &[&Path], seed: Option<u64>) -> CliResult<Self> {
        let argv: Vec<String> = std::env::args().collect();
        let mut hasher = Sha256::new();
        for a in &argv {
            hasher.update(a.as_bytes());
            hasher.update([0u8]);
        }
        let mut inputs = Vec::new();
        for p in input_paths {
            let bytes = io_context(&format!("reading {}", p.display()), std::fs::read(p))?;
            hasher.update(&bytes);
            inputs.push(p.display().to_string());
        }
        let config_hash = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
        let timestamp_unix =
            SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Ok(RunManifest {
            command: command.to_string(),
            inputs,
            argv,
            config_hash,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix,
        })
    }

    pub fn write(&self, out_dir: &Path) -> CliResult<PathBuf> {
        let path = out_dir.join(MANIFEST_FILE);
        let json = serde_json::to_string_pretty(self).expect("manifest serialization");
        io_context(
            &format!("writing {}", path.display()),
            std::fs::write(&path, json + "\n"),
        )?;
        Ok(path)
    }
}
