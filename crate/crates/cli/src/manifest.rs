use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Provenance record written next to every command's outputs.
///
/// Keys are file names relative to the input root or output directory, so
/// identical runs in different directories produce identical digests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub config_digest: Option<String>,
    pub outputs: BTreeMap<String, String>,
    pub timing_ms: BTreeMap<String, u64>,
}

pub struct Recorder {
    manifest: RunManifest,
    started: Instant,
    stage: Instant,
}

impl Recorder {
    pub fn new(command: &str) -> Self {
        Self {
            manifest: RunManifest {
                tool: "equate".into(),
                version: env!("CARGO_PKG_VERSION").into(),
                command: command.into(),
                inputs: BTreeMap::new(),
                config_digest: None,
                outputs: BTreeMap::new(),
                timing_ms: BTreeMap::new(),
            },
            started: Instant::now(),
            stage: Instant::now(),
        }
    }

    pub fn input(&mut self, name: &str, bytes: &[u8]) {
        self.manifest.inputs.insert(name.to_string(), sha256_hex(bytes));
    }

    pub fn config(&mut self, bytes: &[u8]) {
        self.manifest.config_digest = Some(sha256_hex(bytes));
    }

    /// Records the time since the previous stage ended.
    pub fn stage(&mut self, name: &str) {
        let now = Instant::now();
        self.manifest
            .timing_ms
            .insert(name.to_string(), (now - self.stage).as_millis() as u64);
        self.stage = now;
    }

    /// Writes `bytes` to `dir/name` and records its digest.
    pub fn output(&mut self, dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<()> {
        std::fs::write(dir.join(name), bytes)?;
        self.manifest.outputs.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn finish(self, dir: &Path) -> std::io::Result<RunManifest> {
        self.finish_as(dir, MANIFEST_FILE)
    }

    pub fn finish_as(mut self, dir: &Path, file: &str) -> std::io::Result<RunManifest> {
        self.manifest
            .timing_ms
            .insert("total".into(), self.started.elapsed().as_millis() as u64);
        let mut bytes = serde_json::to_vec_pretty(&self.manifest).expect("manifest serializes");
        bytes.push(b'\n');
        std::fs::write(dir.join(file), bytes)?;
        Ok(self.manifest)
    }
}
