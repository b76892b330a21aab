//! JSONL emission with content-hashed manifests.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{CompileError, DatasetExample, EvalExample};
use crate::experience::{read_jsonl, write_jsonl};

pub trait Tasked {
    fn task_name(&self) -> &'static str;
}

impl Tasked for DatasetExample {
    fn task_name(&self) -> &'static str {
        self.task.name()
    }
}

impl Tasked for EvalExample {
    fn task_name(&self) -> &'static str {
        self.task.name()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub file: String,
    pub sha256: String,
    pub records: usize,
    pub counts: BTreeMap<String, usize>,
    pub seed: u64,
    pub config_hash: String,
}

/// Writes one record per line and returns a manifest describing the file.
pub fn emit_dataset<T: Serialize + Tasked>(
    examples: &[T],
    path: &Path,
    seed: u64,
    config_hash: &str,
) -> Result<DatasetManifest, CompileError> {
    write_jsonl(path, examples).map_err(|e| CompileError::Io(e.to_string()))?;
    let bytes = std::fs::read(path).map_err(|e| CompileError::Io(format!("{}: {e}", path.display())))?;
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for e in examples {
        *counts.entry(e.task_name().to_string()).or_default() += 1;
    }
    Ok(DatasetManifest {
        file: path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
        sha256: sha256_hex(&bytes),
        records: examples.len(),
        counts,
        seed,
        config_hash: config_hash.to_string(),
    })
}

pub fn read_dataset<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CompileError> {
    read_jsonl(path).map_err(|e| CompileError::Io(e.to_string()))
}
