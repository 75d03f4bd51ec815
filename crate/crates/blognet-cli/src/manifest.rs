//! Run manifests: every stage records its effective config, input and
//! artifact digests, and timings, so identical reruns are checkable by
//! comparing artifact digests.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: PipelineConfig,
    pub inputs: Vec<FileDigest>,
    pub artifacts: Vec<FileDigest>,
    pub timings_ms: BTreeMap<String, u128>,
    #[serde(skip)]
    started: Instant,
}

fn digest_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)
        .with_context(|| format!("failed to read {} for digest", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Digest of a file, or of a directory as the hash of its sorted
/// `(name, file hash)` entries.
fn digest_path(path: &Path) -> Result<String> {
    if !path.is_dir() {
        return digest_file(path);
    }
    let mut entries: Vec<std::path::PathBuf> = std::fs::read_dir(path)
        .with_context(|| format!("failed to list {}", path.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    entries.sort();
    let mut hasher = Sha256::new();
    for entry in entries {
        if let Some(name) = entry.file_name().and_then(|n| n.to_str()) {
            hasher.update(name.as_bytes());
            hasher.update(b"\0");
            hasher.update(digest_file(&entry)?.as_bytes());
            hasher.update(b"\0");
        }
    }
    Ok(hex::encode(hasher.finalize()))
}

impl RunManifest {
    pub fn new(command: impl Into<String>, config: &PipelineConfig) -> Self {
        RunManifest {
            tool: "blognet",
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            config: config.clone(),
            inputs: Vec::new(),
            artifacts: Vec::new(),
            timings_ms: BTreeMap::new(),
            started: Instant::now(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: digest_path(path)?,
        });
        Ok(())
    }

    pub fn add_artifact(&mut self, path: &Path) -> Result<()> {
        self.artifacts.push(FileDigest {
            path: path.display().to_string(),
            sha256: digest_path(path)?,
        });
        Ok(())
    }

    pub fn record_stage(&mut self, stage: &str, since: Instant) {
        self.timings_ms
            .insert(stage.to_owned(), since.elapsed().as_millis());
    }

    /// Writes `manifest.json` into the output directory, recording the total
    /// elapsed time under `total`.
    pub fn write(mut self, out_dir: &Path) -> Result<()> {
        self.timings_ms
            .insert("total".to_owned(), self.started.elapsed().as_millis());
        let path = out_dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&self)?;
        text.push('\n');
        std::fs::write(&path, text)
            .with_context(|| format!("failed to write {}", path.display()))?;
        Ok(())
    }
}
