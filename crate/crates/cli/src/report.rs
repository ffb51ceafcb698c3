use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Summary printed after every command.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub inputs_digest: String,
    pub seed: u64,
    pub ok: bool,
    pub outputs: BTreeMap<String, String>,
    pub residuals: BTreeMap<String, f64>,
    pub details: serde_json::Value,
    pub wall_time_s: f64,
}

/// SHA-256 over the argument list followed by the contents of every input file.
pub fn inputs_digest(args: &[String], files: &[&Path]) -> std::io::Result<String> {
    let mut h = Sha256::new();
    for a in args {
        h.update(a.as_bytes());
        h.update([0u8]);
    }
    for f in files {
        h.update(std::fs::read(f)?);
        h.update([0u8]);
    }
    Ok(hex::encode(h.finalize()))
}
