use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Environment variable naming the root directory for run outputs.
pub const RUNS_ENV: &str = "REPAIRQ_RUNS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRef {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureRef {
    pub name: String,
    pub sha256: String,
}

/// Everything needed to repeat a run. Written before any computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    /// Arguments after the program name, as given.
    pub args: Vec<String>,
    pub config: serde_json::Value,
    pub seed: u64,
    pub fixture: FixtureRef,
    pub inputs: Vec<FileRef>,
    pub artifacts: Vec<String>,
    pub started_at: String,
    pub version: String,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn file_ref(path: &Path) -> Result<FileRef> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(FileRef { path: path.display().to_string(), sha256: sha256_hex(&bytes) })
}

/// A fresh directory `<root>/<timestamp>-<seed>`, suffixed if the name is taken.
pub struct RunDir {
    pub path: PathBuf,
}

impl RunDir {
    pub fn create(seed: u64) -> Result<Self> {
        let root = std::env::var_os(RUNS_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"));
        let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ");
        let base = format!("{stamp}-{seed}");
        let mut path = root.join(&base);
        let mut n = 1;
        while path.exists() {
            n += 1;
            path = root.join(format!("{base}-{n}"));
        }
        fs::create_dir_all(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(Self { path })
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    pub fn write_manifest(&self, manifest: &Manifest) -> Result<()> {
        let text = serde_json::to_string_pretty(manifest)?;
        fs::write(self.file("manifest.json"), text + "\n")?;
        Ok(())
    }

    pub fn write(&self, name: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
        let path = self.file(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))
    }
}
