use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::errors::CliError;

/// A referenced file with its content hash.
#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
}

/// The run manifest: command line, seed, resolved configuration, hashed
/// inputs and outputs, and wall-clock timestamps. One manifest per run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub version: u32,
    pub command: Vec<String>,
    pub seed: u64,
    pub config: serde_json::Value,
    pub inputs: Vec<Artifact>,
    pub outputs: Vec<Artifact>,
    pub started_at: String,
    pub finished_at: String,
}

pub fn hash_file(path: &Path) -> Result<Artifact, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::io(format!("hashing {}: {e}", path.display())))?;
    let digest = Sha256::digest(&bytes);
    let mut hex = String::with_capacity(64);
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    Ok(Artifact {
        path: path.display().to_string(),
        sha256: hex,
    })
}

/// Collects inputs/outputs during a command run and writes the manifest at
/// the end.
pub struct ManifestBuilder {
    started_at: String,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl ManifestBuilder {
    pub fn new() -> Self {
        Self {
            started_at: chrono::Utc::now().to_rfc3339(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn record_input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    pub fn record_output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    pub fn write(
        self,
        manifest_path: &Path,
        command: Vec<String>,
        seed: u64,
        config: serde_json::Value,
    ) -> Result<(), CliError> {
        let inputs = self
            .inputs
            .iter()
            .map(|p| hash_file(p))
            .collect::<Result<Vec<_>, _>>()?;
        let outputs = self
            .outputs
            .iter()
            .map(|p| hash_file(p))
            .collect::<Result<Vec<_>, _>>()?;
        let manifest = RunManifest {
            version: 1,
            command,
            seed,
            config,
            inputs,
            outputs,
            started_at: self.started_at,
            finished_at: chrono::Utc::now().to_rfc3339(),
        };
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::data(e.to_string()))?;
        std::fs::write(manifest_path, text + "\n")
            .map_err(|e| CliError::io(format!("{}: {e}", manifest_path.display())))?;
        Ok(())
    }
}
