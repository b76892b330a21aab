//! Symbolic household world model and embodied-experience pipeline.

pub mod compile;
pub mod experience;
pub mod explore;
pub mod goals;
pub mod metrics;
pub mod oracle;
pub mod planner;
pub mod world;

use sha2::{Digest, Sha256};

/// Seed for a named pipeline stage, derived from the global seed.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest is 32 bytes"))
}
