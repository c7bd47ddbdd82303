use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sltb_core::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)?;
        let hash = Sha256::digest(&bytes);
        Ok(Self {
            path: path.to_path_buf(),
            sha256: hash.iter().map(|b| format!("{b:02x}")).collect(),
        })
    }

    pub fn verify(&self) -> Result<()> {
        let now = Self::of(&self.path)?;
        if now.sha256 != self.sha256 {
            return Err(Error::Validation(format!(
                "input {} changed since the recorded run (sha256 {} != {})",
                self.path.display(),
                now.sha256,
                self.sha256
            )));
        }
        Ok(())
    }
}

/// Everything needed to rerun a command: the resolved configuration, the
/// seed and digests of every file that was read.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
}

pub fn unix_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}
