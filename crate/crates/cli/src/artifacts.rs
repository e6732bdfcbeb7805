use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const SCHEMA: u32 = 1;
pub const MANIFEST: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Serialize)]
struct FileEntry<'a> {
    path: &'a str,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema: u32,
    mode: &'a str,
    seed: u64,
    config_hash: &'a str,
    files: Vec<FileEntry<'a>>,
    warnings: &'a [String],
}

/// Output files held in memory until the run completes.
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
    pub warnings: Vec<String>,
}

impl Artifacts {
    pub fn new() -> Self {
        Self {
            files: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        debug_assert!(name != MANIFEST && !self.files.iter().any(|(n, _)| n == name));
        self.files.push((name.to_string(), bytes));
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Validation(format!("cannot serialize {name}: {e}")))?;
        s.push('\n');
        self.add(name, s.into_bytes());
        Ok(())
    }

    pub fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }

    /// Writes every artifact and then the manifest; returns the manifest
    /// bytes.
    pub fn commit(self, dir: &Path, mode: &str, seed: u64, config_hash: &str) -> Result<Vec<u8>, CliError> {
        let io = |p: &Path, e: std::io::Error| CliError::Validation(format!("cannot write {}: {e}", p.display()));
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        for (name, bytes) in &self.files {
            let p = dir.join(name);
            fs::write(&p, bytes).map_err(|e| io(&p, e))?;
        }
        let manifest = Manifest {
            schema: SCHEMA,
            mode,
            seed,
            config_hash,
            files: self
                .files
                .iter()
                .map(|(n, b)| FileEntry {
                    path: n,
                    bytes: b.len(),
                    sha256: sha256_hex(b),
                })
                .collect(),
            warnings: &self.warnings,
        };
        let mut s = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        s.push('\n');
        let p = dir.join(MANIFEST);
        fs::write(&p, &s).map_err(|e| io(&p, e))?;
        Ok(s.into_bytes())
    }
}
