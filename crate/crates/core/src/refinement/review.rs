//! Append-only review journal. Each line records one state change of one
//! decision; replaying the file rebuilds the current states.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::decision::ReviewState;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewEntry {
    pub decision: String,
    pub state: ReviewState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Number of changes applied to this decision so far, this one included.
    pub version: u64,
    /// Milliseconds since the Unix epoch.
    pub at: u64,
}

#[derive(Debug)]
pub struct ReviewJournal {
    path: PathBuf,
    current: BTreeMap<String, ReviewEntry>,
}

impl ReviewJournal {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut current = BTreeMap::new();
        if path.exists() {
            let text = fs::read_to_string(&path).map_err(Error::io(&path))?;
            for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
                let e: ReviewEntry = serde_json::from_str(line).map_err(|e| Error::Parse {
                    file: path.clone(),
                    line: Some(i + 1),
                    message: e.to_string(),
                })?;
                current.insert(e.decision.clone(), e);
            }
        }
        Ok(ReviewJournal { path, current })
    }

    pub fn get(&self, decision: &str) -> Option<&ReviewEntry> {
        self.current.get(decision)
    }

    pub fn entries(&self) -> impl Iterator<Item = &ReviewEntry> {
        self.current.values()
    }

    /// Record a review. Repeating the current state and note is a no-op and
    /// leaves the version unchanged. Returns the entry and whether it changed.
    pub fn set(&mut self, decision: &str, state: ReviewState, note: Option<String>) -> Result<(ReviewEntry, bool)> {
        let prev = self.current.get(decision);
        let note = note.or_else(|| prev.and_then(|p| p.note.clone()));
        if let Some(p) = prev {
            if p.state == state && p.note == note {
                return Ok((p.clone(), false));
            }
        }
        let at = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0);
        let entry = ReviewEntry {
            decision: decision.to_string(),
            state,
            note,
            version: prev.map_or(1, |p| p.version + 1),
            at,
        };
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(Error::io(dir))?;
        }
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(Error::io(&self.path))?;
        writeln!(f, "{}", serde_json::to_string(&entry)?).map_err(Error::io(&self.path))?;
        f.sync_data().map_err(Error::io(&self.path))?;
        self.current.insert(decision.to_string(), entry.clone());
        Ok((entry, true))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn idempotent_and_replayable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("review.jsonl");
        let mut j = ReviewJournal::open(&path).unwrap();
        let (a, changed) = j.set("d1", ReviewState::Accepted, None).unwrap();
        assert!(changed);
        let (b, changed) = j.set("d1", ReviewState::Accepted, None).unwrap();
        assert!(!changed);
        assert_eq!(a, b);
        let (c, _) = j.set("d1", ReviewState::Annotated, Some("check scope".into())).unwrap();
        assert_eq!(c.version, 2);
        let replayed = ReviewJournal::open(&path).unwrap();
        assert_eq!(replayed.get("d1"), Some(&c));
        assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 2);
    }
}
