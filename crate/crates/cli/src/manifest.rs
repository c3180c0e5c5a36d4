use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

/// What a run read, how it was configured, and what it wrote.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub seed: u64,
    pub output_dir: String,
    /// `generated` or the input path.
    pub data_source: String,
    pub input_sha256: Option<String>,
    pub config: RunConfig,
    /// File name to SHA-256 of its bytes.
    pub artifacts: BTreeMap<String, String>,
    pub summary: serde_json::Value,
}

pub fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Collects written files and their checksums under one output directory.
pub struct Outputs {
    pub dir: PathBuf,
    pub artifacts: BTreeMap<String, String>,
}

impl Outputs {
    pub fn create(dir: PathBuf) -> anyhow::Result<Self> {
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Outputs {
            dir,
            artifacts: BTreeMap::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Records a file that has already been written.
    pub fn record(&mut self, name: &str) -> anyhow::Result<()> {
        let sum = sha256_file(&self.path(name))?;
        self.artifacts.insert(name.to_string(), sum);
        Ok(())
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> anyhow::Result<()> {
        let path = self.path(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.record(name)
    }

    pub fn write_manifest(&self, manifest: &RunManifest) -> anyhow::Result<()> {
        let path = self.path("manifest.json");
        let mut text = serde_json::to_string_pretty(manifest)?;
        text.push('\n');
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }
}
