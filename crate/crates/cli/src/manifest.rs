//! Run manifest: which inputs a run used, their digests, and when each
//! stage ran.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputRecord {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub started_at: u64,
    pub finished_at: u64,
    /// Input names read by the stage, keys of [`RunManifest::inputs`].
    pub inputs: Vec<String>,
    /// Output name → path relative to the run directory.
    pub outputs: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub created_at: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<String>,
    pub inputs: BTreeMap<String, InputRecord>,
    pub stages: Vec<StageRecord>,
}

pub fn now_millis() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

fn hash_file(h: &mut Sha256, path: &Path) -> io::Result<()> {
    let mut f = fs::File::open(path)?;
    io::copy(&mut f, h)?;
    Ok(())
}

/// Digest of a file, or of a directory as the sorted list of relative
/// paths and file contents beneath it.
pub fn digest(path: &Path) -> Result<String> {
    let mut h = Sha256::new();
    if path.is_dir() {
        let mut files = Vec::new();
        let mut stack = vec![path.to_path_buf()];
        while let Some(dir) = stack.pop() {
            for e in fs::read_dir(&dir).with_context(|| format!("reading {}", dir.display()))? {
                let p = e?.path();
                if p.is_dir() {
                    stack.push(p);
                } else {
                    files.push(p);
                }
            }
        }
        files.sort();
        for f in files {
            let rel = f.strip_prefix(path).unwrap_or(&f);
            h.update(rel.to_string_lossy().as_bytes());
            h.update([0]);
            hash_file(&mut h, &f).with_context(|| format!("hashing {}", f.display()))?;
        }
    } else {
        hash_file(&mut h, path).with_context(|| format!("hashing {}", path.display()))?;
    }
    Ok(format!("{:x}", h.finalize()))
}

impl RunManifest {
    pub fn new() -> Self {
        let created_at = now_millis();
        RunManifest {
            run_id: format!("run-{created_at}"),
            created_at,
            schema_version: None,
            inputs: BTreeMap::new(),
            stages: Vec::new(),
        }
    }

    pub fn path(run: &Path) -> PathBuf {
        run.join(MANIFEST_FILE)
    }

    pub fn load(run: &Path) -> Result<Self> {
        let p = Self::path(run);
        let text = fs::read_to_string(&p).with_context(|| format!("no run manifest at {}", p.display()))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn load_or_new(run: &Path) -> Result<Self> {
        if Self::path(run).exists() {
            Self::load(run)
        } else {
            Ok(Self::new())
        }
    }

    pub fn save(&self, run: &Path) -> Result<()> {
        fs::create_dir_all(run).with_context(|| format!("creating {}", run.display()))?;
        let p = Self::path(run);
        fs::write(&p, serde_json::to_string_pretty(self)?).with_context(|| format!("writing {}", p.display()))
    }

    /// Record the digest of `path` under `name`, or check it against the
    /// digest already recorded. A changed input is an error.
    pub fn admit(&mut self, name: &str, path: &Path) -> Result<()> {
        let sha256 = digest(path)?;
        let path = fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf());
        match self.inputs.get(name) {
            Some(prev) if prev.path != path => {
                bail!("input `{name}` is {} in this run, not {}", prev.path.display(), path.display())
            }
            Some(prev) if prev.sha256 != sha256 => {
                bail!("input `{name}` ({}) changed since it was recorded: digest mismatch", path.display())
            }
            Some(_) => {}
            None => {
                self.inputs.insert(name.to_string(), InputRecord { path, sha256 });
            }
        }
        Ok(())
    }

    /// Recorded path of an input, after re-checking its digest.
    pub fn input(&self, name: &str) -> Result<PathBuf> {
        let rec = self.inputs.get(name).with_context(|| format!("the run has no `{name}` input"))?;
        if digest(&rec.path)? != rec.sha256 {
            bail!("input `{name}` ({}) changed since it was recorded: digest mismatch", rec.path.display());
        }
        Ok(rec.path.clone())
    }

    pub fn has_input(&self, name: &str) -> bool {
        self.inputs.contains_key(name)
    }

    pub fn stage(&mut self, stage: &str, started_at: u64, inputs: &[&str], outputs: &[(&str, &str)]) {
        self.stages.push(StageRecord {
            stage: stage.to_string(),
            started_at,
            finished_at: now_millis(),
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            outputs: outputs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        });
    }
}

impl Default for RunManifest {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn changed_input_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("rules.yaml");
        fs::write(&f, "a").unwrap();
        let mut m = RunManifest::new();
        m.admit("rules", &f).unwrap();
        m.admit("rules", &f).unwrap();
        fs::write(&f, "b").unwrap();
        assert!(m.admit("rules", &f).is_err());
        assert!(m.input("rules").is_err());
    }

    #[test]
    fn directory_digest_tracks_names_and_contents() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir(dir.path().join("sub")).unwrap();
        fs::write(dir.path().join("sub/a"), "x").unwrap();
        let d1 = digest(dir.path()).unwrap();
        fs::rename(dir.path().join("sub/a"), dir.path().join("sub/b")).unwrap();
        let d2 = digest(dir.path()).unwrap();
        assert_ne!(d1, d2);
        assert_eq!(d2, digest(dir.path()).unwrap());
    }
}
