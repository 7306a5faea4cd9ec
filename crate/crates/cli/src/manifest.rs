//! Run manifests: every stage records its inputs, outputs, and effective
//! configuration with content digests, so unchanged reruns are verifiable
//! byte for byte (timestamps aside).

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub stage: String,
    pub created_utc: DateTime<Utc>,
    pub seed: Option<u64>,
    pub config_digest: String,
    pub checkpoint_digest: Option<String>,
    pub inputs: Vec<FileEntry>,
    pub outputs: Vec<FileEntry>,
    pub effective_config: serde_json::Value,
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)
        .with_context(|| format!("cannot digest {}", path.display()))?;
    Ok(format!("{:x}", Sha256::digest(bytes)))
}

impl RunManifest {
    pub fn new<C: Serialize>(stage: &str, config: &C) -> Result<Self> {
        let effective_config = serde_json::to_value(config)?;
        let config_digest = format!(
            "{:x}",
            Sha256::digest(serde_json::to_vec(&effective_config)?)
        );
        Ok(RunManifest {
            stage: stage.to_string(),
            created_utc: Utc::now(),
            seed: None,
            config_digest,
            checkpoint_digest: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            effective_config,
        })
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(FileEntry {
            path: path.to_path_buf(),
            sha256: file_digest(path)?,
        });
        Ok(())
    }

    pub fn add_output(&mut self, path: &Path) -> Result<()> {
        self.outputs.push(FileEntry {
            path: path.to_path_buf(),
            sha256: file_digest(path)?,
        });
        Ok(())
    }

    /// Write as `<stage>_manifest.json` in `dir` and return the path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("{}_manifest.json", self.stage));
        std::fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digests_are_stable_across_reruns() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("data.csv");
        std::fs::write(&file, "a,b\n1,2\n").unwrap();

        let build = || {
            let mut m = RunManifest::new("test", &serde_json::json!({"k": 1})).unwrap();
            m.add_output(&file).unwrap();
            m
        };
        let first = build();
        let second = build();
        assert_eq!(first.config_digest, second.config_digest);
        assert_eq!(first.outputs[0].sha256, second.outputs[0].sha256);
    }

    #[test]
    fn manifest_file_roundtrips() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = RunManifest::new("analyze", &serde_json::json!({"alpha": 0.05})).unwrap();
        let path = manifest.write(dir.path()).unwrap();
        let back: RunManifest =
            serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        assert_eq!(back.stage, "analyze");
        assert_eq!(back.config_digest, manifest.config_digest);
    }
}
