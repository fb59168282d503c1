//! Run manifests: everything needed to reproduce a run bit-for-bit,
//! plus content hashes of what it read and wrote.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
struct Artifact {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
pub struct RunManifest {
    command: Vec<String>,
    resolved_config: serde_json::Value,
    seeds: Vec<u64>,
    inputs: Vec<Artifact>,
    outputs: Vec<Artifact>,
    timings_ms: Vec<(String, f64)>,
}

/// Collects artifacts and timings during a command, then writes
/// `manifest.json`.
pub struct ManifestBuilder {
    manifest: RunManifest,
    started: Instant,
    last_mark: Instant,
}

impl ManifestBuilder {
    pub fn new(resolved_config: serde_json::Value, seeds: Vec<u64>) -> Self {
        let now = Instant::now();
        ManifestBuilder {
            manifest: RunManifest {
                command: std::env::args().collect(),
                resolved_config,
                seeds,
                inputs: Vec::new(),
                outputs: Vec::new(),
                timings_ms: Vec::new(),
            },
            started: now,
            last_mark: now,
        }
    }

    pub fn record_input(&mut self, path: &Path) -> Result<()> {
        self.manifest.inputs.push(artifact(path)?);
        Ok(())
    }

    /// Write a file and record its hash as an output.
    pub fn write_output(&mut self, path: &Path, contents: &str) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
        std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.manifest.outputs.push(Artifact {
            path: path.display().to_string(),
            sha256: hex(&Sha256::digest(contents.as_bytes())),
        });
        Ok(())
    }

    /// Record the wall-clock time since the previous mark under `stage`.
    pub fn mark(&mut self, stage: &str) {
        let now = Instant::now();
        self.manifest
            .timings_ms
            .push((stage.to_string(), now.duration_since(self.last_mark).as_secs_f64() * 1e3));
        self.last_mark = now;
    }

    pub fn finish(mut self, dir: &Path) -> Result<PathBuf> {
        self.manifest
            .timings_ms
            .push(("total".to_string(), self.started.elapsed().as_secs_f64() * 1e3));
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&self.manifest)?;
        text.push('\n');
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

fn artifact(path: &Path) -> Result<Artifact> {
    let bytes = std::fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(Artifact {
        path: path.display().to_string(),
        sha256: hex(&Sha256::digest(&bytes)),
    })
}

fn hex(digest: &[u8]) -> String {
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
