//! Run manifest: every artifact hashed, plus the seed that produced it.

use std::collections::BTreeSet;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub version: String,
    pub seed: u64,
    pub scenario: String,
    pub artifacts: Vec<ArtifactEntry>,
}

#[derive(Debug, Serialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

fn sha256_file(path: &Path) -> Result<String, CliError> {
    let mut file = std::fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex_string(&hasher.finalize()))
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn collect_files(root: &Path, dir: &Path, out: &mut BTreeSet<PathBuf>) -> Result<(), CliError> {
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_files(root, &path, out)?;
        } else if path.file_name().is_some_and(|n| n != MANIFEST_NAME) {
            out.insert(path.strip_prefix(root).unwrap().to_path_buf());
        }
    }
    Ok(())
}

/// Hashes everything under `out_dir` (except the manifest itself) and writes
/// `manifest.json`. Returns the manifest's own SHA-256.
pub fn write_manifest(out_dir: &Path, seed: u64, scenario: &str) -> Result<String, CliError> {
    let mut files = BTreeSet::new();
    collect_files(out_dir, out_dir, &mut files)?;
    let mut artifacts = Vec::with_capacity(files.len());
    for rel in files {
        let full = out_dir.join(&rel);
        artifacts.push(ArtifactEntry {
            path: rel.to_string_lossy().replace('\\', "/"),
            bytes: std::fs::metadata(&full)?.len(),
            sha256: sha256_file(&full)?,
        });
    }
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        scenario: scenario.to_string(),
        artifacts,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    let path = out_dir.join(MANIFEST_NAME);
    std::fs::write(&path, json.as_bytes())?;
    Ok(hex_string(&Sha256::digest(json.as_bytes())))
}
