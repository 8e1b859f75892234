//! Artifact helpers: config hashing, CSV tables and atomic file writes.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hex SHA-256 of the canonical JSON encoding of `config`.
pub fn config_hash<T: Serialize>(config: &T) -> Result<String> {
    Ok(sha256_hex(&serde_json::to_vec(config)?))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Provenance block embedded in every report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

impl Provenance {
    pub fn new<T: Serialize>(config: &T, seed: u64) -> Result<Self> {
        Ok(Self {
            config_hash: config_hash(config)?,
            seed,
            version: TOOL_VERSION.to_string(),
        })
    }
}

/// Formats a float so that parsing it back yields the same value.
pub fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:?}")
}

pub fn csv_table(header: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| fmt_f64(*x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Writes `contents` to a temporary sibling of `path` and renames it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = config_hash(&serde_json::json!({"gamma": 1.0, "seed": 3})).unwrap();
        let b = config_hash(&serde_json::json!({"gamma": 1.0, "seed": 3})).unwrap();
        let c = config_hash(&serde_json::json!({"gamma": 2.0, "seed": 3})).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn floats_round_trip_through_csv() {
        let xs = [0.1, -1.0 / 3.0, 1e-300, 12345.678];
        let csv = csv_table(&["x".into()], &[xs.to_vec()]);
        let row = csv.lines().nth(1).unwrap();
        let back: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(back, xs);
    }
}
