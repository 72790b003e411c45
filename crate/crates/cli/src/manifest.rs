use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    /// Relative to the manifest's directory.
    pub file: String,
    pub name: String,
    pub n: usize,
    pub dimension: usize,
    pub scenario: u32,
    pub seed: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed_base: u64,
    pub instances: Vec<Entry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Manifest {
    pub fn load(path: &Path) -> Result<(PathBuf, Manifest)> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let m: Manifest =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((dir, m))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }
}

/// Loads an instance listed in a manifest after checking its hash.
pub fn load_entry(dir: &Path, e: &Entry) -> Result<mstn::Instance> {
    let path = dir.join(&e.file);
    let bytes = std::fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
    let got = sha256_hex(&bytes);
    if got != e.sha256 {
        bail!("{}: sha256 {got} does not match manifest {}", path.display(), e.sha256);
    }
    let text = String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))?;
    mstn::Instance::from_json(&text).with_context(|| format!("loading {}", path.display()))
}
