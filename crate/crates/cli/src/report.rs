use serde::Serialize;
use sha2::{Digest, Sha256};
use slp_core::Budget;

/// What every command prints with `--json`. Two runs with the same inputs and
/// seed differ only in `wall_time_ms`.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    /// SHA-256 over the input files, each followed by a NUL byte.
    pub inputs_digest: String,
    pub result: serde_json::Value,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub budget: Budget,
    pub wall_time_ms: u64,
}

pub fn digest(inputs: &[String]) -> String {
    let mut h = Sha256::new();
    for text in inputs {
        h.update(text.as_bytes());
        h.update([0u8]);
    }
    hex::encode(h.finalize())
}
