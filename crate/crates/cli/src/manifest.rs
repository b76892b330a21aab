//! Content-hashed record of every file a command writes.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::Context;
use homeworld::compile::sha256_hex;
use serde::{Deserialize, Serialize};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub sha256: String,
    pub bytes: u64,
    /// Lines, for JSONL files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub records: Option<usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub counts: BTreeMap<String, usize>,
    /// Command that wrote the file.
    pub stage: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub seed: u64,
    pub stage_seeds: BTreeMap<String, u64>,
    pub files: BTreeMap<String, FileEntry>,
}

impl Manifest {
    /// The manifest in `dir`, or an empty one. A manifest written under a
    /// different configuration is discarded.
    pub fn open(dir: &Path, config_hash: &str, seed: u64) -> anyhow::Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        if path.is_file() {
            let m: Manifest = serde_json::from_str(&fs::read_to_string(&path)?)
                .with_context(|| format!("parsing {}", path.display()))?;
            if m.config_hash == config_hash {
                return Ok(m);
            }
        }
        Ok(Manifest { config_hash: config_hash.to_string(), seed, ..Default::default() })
    }

    pub fn read(dir: &Path) -> anyhow::Result<Option<Self>> {
        let path = dir.join(MANIFEST_FILE);
        if !path.is_file() {
            return Ok(None);
        }
        Ok(Some(
            serde_json::from_str(&fs::read_to_string(&path)?).with_context(|| format!("parsing {}", path.display()))?,
        ))
    }

    /// Hashes `dir/name` and records it.
    pub fn record(
        &mut self,
        dir: &Path,
        name: &str,
        stage: &str,
        counts: BTreeMap<String, usize>,
    ) -> anyhow::Result<()> {
        let bytes = fs::read(dir.join(name)).with_context(|| format!("reading {name}"))?;
        let records = name.ends_with(".jsonl").then(|| bytes.iter().filter(|b| **b == b'\n').count());
        self.files.insert(
            name.to_string(),
            FileEntry {
                sha256: sha256_hex(&bytes),
                bytes: bytes.len() as u64,
                records,
                counts,
                stage: stage.to_string(),
            },
        );
        Ok(())
    }

    pub fn save(&self, dir: &Path) -> anyhow::Result<()> {
        write_json(&dir.join(MANIFEST_FILE), self)
    }

    /// Files whose current content no longer matches their entry.
    pub fn stale(&self, dir: &Path) -> Vec<String> {
        self.files
            .iter()
            .filter(|(name, e)| fs::read(dir.join(name)).map(|b| sha256_hex(&b) != e.sha256).unwrap_or(true))
            .map(|(name, _)| name.clone())
            .collect()
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Hash over the sorted relative paths and contents of every file under
/// `dir`.
pub fn tree_hash(dir: &Path) -> anyhow::Result<String> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, String)>) -> anyhow::Result<()> {
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            if path.is_dir() {
                walk(root, &path, out)?;
            } else {
                let rel = path.strip_prefix(root)?.to_string_lossy().replace('\\', "/");
                out.push((rel, sha256_hex(&fs::read(&path)?)));
            }
        }
        Ok(())
    }
    let mut files = Vec::new();
    walk(dir, dir, &mut files)?;
    files.sort();
    let listing: String = files.iter().map(|(p, h)| format!("{h}  {p}\n")).collect();
    Ok(sha256_hex(listing.as_bytes()))
}
