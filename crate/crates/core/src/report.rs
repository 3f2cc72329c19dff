//! Deterministic report envelope for the command-line surface: identical
//! inputs and seed produce byte-identical payloads; wall-clock timing
//! stays outside the payload.

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: Vec<String>,
    pub input_hash: String,
    pub payload: serde_json::Value,
    pub timing_ms: u128,
}

pub fn input_hash<T: Serialize>(input: &T) -> String {
    let bytes = serde_json::to_vec(input).expect("inputs serialize");
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    hex_string(&hasher.finalize())
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl Report {
    pub fn new<T: Serialize, P: Serialize>(
        command: Vec<String>,
        input: &T,
        payload: &P,
        timing_ms: u128,
    ) -> Report {
        Report {
            schema_version: 1,
            command,
            input_hash: input_hash(input),
            payload: serde_json::to_value(payload).expect("payload serializes"),
            timing_ms,
        }
    }
}
