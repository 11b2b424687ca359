//! Run manifest: what produced an output directory.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub tool_version: String,
    pub subcommand: String,
    pub seed: u64,
    pub started_unix: u64,
    pub finished_unix: Option<u64>,
    pub files: Vec<String>,
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// SHA-256 of the config's canonical JSON (keys sorted at every level).
pub fn config_hash(config: &ExperimentConfig) -> String {
    let value = serde_json::to_value(config).expect("config serializes");
    let canonical = serde_json::to_string(&value).expect("value serializes");
    Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn start(config: &ExperimentConfig, subcommand: &str, seed: u64, files: Vec<String>) -> Self {
        Self {
            config_hash: config_hash(config),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            seed,
            started_unix: now_unix(),
            finished_unix: None,
            files,
        }
    }

    pub fn finish(&mut self) {
        self.finished_unix = Some(now_unix());
    }

    /// Write via a temporary file and rename.
    pub fn write_atomic(&self, dir: &Path) -> Result<(), CliError> {
        let tmp = dir.join(format!(".{MANIFEST_FILE}.tmp"));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(serde_json::to_string_pretty(self).expect("manifest serializes").as_bytes())?;
            f.write_all(b"\n")?;
            f.sync_all()?;
        }
        fs::rename(&tmp, dir.join(MANIFEST_FILE))?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
        serde_json::from_str(&text).map_err(|e| CliError::Io(format!("manifest: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_key_order() {
        let a = ExperimentConfig::from_json(r#"{"epsilon": 0.01, "dim": 1, "x0": [0.5]}"#).unwrap();
        let b = ExperimentConfig::from_json(r#"{"x0": [0.5], "epsilon": 0.01, "dim": 1}"#).unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        let c = ExperimentConfig::from_json(r#"{"x0": [0.5], "epsilon": 0.02, "dim": 1}"#).unwrap();
        assert_ne!(config_hash(&a), config_hash(&c));
        assert_eq!(config_hash(&a).len(), 64);
    }

    #[test]
    fn atomic_write_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = RunManifest::start(&ExperimentConfig::default(), "simulate", 3, vec!["a.csv".into()]);
        m.write_atomic(dir.path()).unwrap();
        m.finish();
        m.write_atomic(dir.path()).unwrap();
        assert_eq!(RunManifest::read(dir.path()).unwrap(), m);
        assert!(!dir.path().join(".manifest.json.tmp").exists());
    }
}
