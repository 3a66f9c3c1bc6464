//! Atomic artifact writes and the run manifest.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `bytes` to `path` through a temp file in the same directory and a
/// rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

/// Manifest entry for one subcommand run. Holds no timestamps so identical
/// runs give identical manifests.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct RunRecord {
    pub tool_version: String,
    pub args: Vec<String>,
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub formats: BTreeMap<String, String>,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
}

/// Collects outputs of one run and records them in `<out>/manifest.json`,
/// keyed by subcommand.
pub struct Run {
    pub out: PathBuf,
    command: String,
    record: RunRecord,
}

impl Run {
    pub fn new(out: PathBuf, command: &str, args: Vec<String>, config_sha256: String, seed: Option<u64>) -> Run {
        Run {
            out,
            command: command.to_string(),
            record: RunRecord {
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                args,
                config_sha256,
                seed,
                formats: BTreeMap::new(),
                inputs: Vec::new(),
                outputs: Vec::new(),
            },
        }
    }

    pub fn format(&mut self, artifact: &str, version: &str) {
        self.record.formats.insert(artifact.to_string(), version.to_string());
    }

    pub fn input(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.record.inputs.push(FileRecord {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(bytes)
    }

    /// Writes `<out>/<name>` atomically and records it.
    pub fn output(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.out.join(name);
        write_atomic(&path, bytes)?;
        self.record.outputs.push(FileRecord {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(path)
    }

    pub fn finish(self) -> Result<()> {
        let path = self.out.join("manifest.json");
        let mut all: BTreeMap<String, RunRecord> = match std::fs::read(&path) {
            Ok(b) => serde_json::from_slice(&b).unwrap_or_default(),
            Err(_) => BTreeMap::new(),
        };
        all.insert(self.command, self.record);
        let mut bytes = serde_json::to_vec_pretty(&all)?;
        bytes.push(b'\n');
        write_atomic(&path, &bytes)
    }
}
