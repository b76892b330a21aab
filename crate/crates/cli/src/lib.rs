//! Pipeline orchestration behind the `homeworld` binary.

pub mod commands;
pub mod config;
pub mod manifest;

use std::fmt;

pub use commands::{collect, compile, ewc_demo, score, validate, CollectSummary, DemoRun};
pub use config::{Overrides, PipelineConfig};
pub use manifest::{tree_hash, Manifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    /// Bad flags, unreadable inputs, I/O failures.
    Usage = 1,
    /// Configuration or data that fails validation.
    Validation = 2,
    /// Gold answers disagree with the replay oracle.
    Oracle = 3,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ExitKind,
    pub stage: &'static str,
    pub source: anyhow::Error,
}

impl CliError {
    pub fn new(kind: ExitKind, stage: &'static str, source: anyhow::Error) -> Self {
        CliError { kind, stage, source }
    }

    pub fn code(&self) -> u8 {
        self.kind as u8
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {:#}", self.stage, self.source)
    }
}

impl std::error::Error for CliError {}

/// Runs `f` on a pool of `jobs` threads (0 for the default).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    Ok(pool.install(f))
}
