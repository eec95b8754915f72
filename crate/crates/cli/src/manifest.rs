use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.jsonl";

/// One record per successful run, appended to `manifest.jsonl` in the
/// output directory.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub args: Vec<String>,
    /// SHA-256 of the resolved inputs (scenario TOML and any profile file).
    pub scenario_sha256: String,
    /// Files written by the run, relative to the output directory.
    pub artifacts: Vec<String>,
    pub duration_s: f64,
}

pub fn sha256_hex(parts: &[&[u8]]) -> String {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update(part);
    }
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn append(out_dir: &Path, manifest: &RunManifest) -> CliResult<()> {
    let path = out_dir.join(MANIFEST_FILE);
    let err = |source| CliError::Manifest {
        path: path.display().to_string(),
        source,
    };
    std::fs::create_dir_all(out_dir).map_err(err)?;
    let mut line = serde_json::to_string(manifest).expect("manifest serializes");
    line.push('\n');
    std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .and_then(|mut f| f.write_all(line.as_bytes()))
        .map_err(err)
}
