//! Stage bookkeeping: checksums, run logs and the pipeline manifest.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const LOG_DIR: &str = "logs";

/// Hex SHA-256 of a file's bytes.
pub fn sha256_file(path: &Path) -> Result<String> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut r = BufReader::new(f);
    let mut h = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = r.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

fn key(path: &Path) -> String {
    std::fs::canonicalize(path)
        .unwrap_or_else(|_| path.to_path_buf())
        .display()
        .to_string()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    /// Path to checksum, as seen when the stage ran.
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub log: String,
    pub finished_unix: u64,
}

/// Which stage wrote which file, and what every stage read.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineManifest {
    pub stages: BTreeMap<String, StageRecord>,
}

impl PipelineManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(Self::default());
        }
        let text = std::fs::read_to_string(&path)?;
        serde_json::from_str(&text).with_context(|| format!("corrupt manifest {}", path.display()))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, serde_json::to_string_pretty(self)? + "\n")
            .with_context(|| format!("cannot write {}", path.display()))
    }

    /// Problems with the given inputs: a file changed after the stage that
    /// wrote it, or its producer ran on inputs that have since changed.
    pub fn stale_inputs(&self, inputs: &[PathBuf]) -> Vec<String> {
        let mut out = Vec::new();
        for input in inputs {
            let k = key(input);
            let Ok(now) = sha256_file(input) else { continue };
            for (stage, rec) in &self.stages {
                let Some(written) = rec.outputs.get(&k) else { continue };
                if *written != now {
                    out.push(format!("{k} changed after stage {stage} wrote it"));
                    continue;
                }
                for (upstream, seen) in &rec.inputs {
                    match sha256_file(Path::new(upstream)) {
                        Ok(cur) if cur == *seen => {}
                        _ => out.push(format!(
                            "{k} is stale: stage {stage} read {upstream}, which has changed since"
                        )),
                    }
                }
            }
        }
        out
    }

    pub fn record(&mut self, stage: &str, inputs: &[(String, String)], outputs: &[(String, String)], log: &Path) {
        self.stages.insert(
            stage.to_string(),
            StageRecord {
                inputs: inputs.iter().cloned().collect(),
                outputs: outputs.iter().cloned().collect(),
                log: log.display().to_string(),
                finished_unix: unix_now(),
            },
        );
    }
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to re-run a stage.
#[derive(Debug, Clone, Serialize)]
pub struct RunLog {
    pub stage: String,
    pub version: String,
    pub argv: Vec<String>,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub started_unix: u64,
    pub seconds: f64,
    pub warnings: Vec<String>,
}

pub fn digests(paths: &[PathBuf]) -> Result<Vec<(String, String)>> {
    paths.iter().map(|p| Ok((key(p), sha256_file(p)?))).collect()
}

pub fn to_digests(pairs: &[(String, String)]) -> Vec<FileDigest> {
    pairs
        .iter()
        .map(|(path, sha256)| FileDigest {
            path: path.clone(),
            sha256: sha256.clone(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_known_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x");
        std::fs::write(&p, b"abc").unwrap();
        assert_eq!(
            sha256_file(&p).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn detects_modified_output() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        std::fs::write(&a, "1").unwrap();
        std::fs::write(&b, "2").unwrap();
        let mut m = PipelineManifest::default();
        let ins = digests(std::slice::from_ref(&a)).unwrap();
        let outs = digests(std::slice::from_ref(&b)).unwrap();
        m.record("s", &ins, &outs, Path::new("log"));
        assert!(m.stale_inputs(std::slice::from_ref(&b)).is_empty());
        std::fs::write(&a, "changed").unwrap();
        assert_eq!(m.stale_inputs(std::slice::from_ref(&b)).len(), 1);
        std::fs::write(&b, "changed").unwrap();
        assert!(m.stale_inputs(&[b])[0].contains("changed after stage s"));
    }
}
