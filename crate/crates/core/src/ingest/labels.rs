//! Identifier → display label resolution.
//!
//! The persistent [`LabelStore`] is a single redb file with two tables:
//! `labels` (packed id key → label) and `by_label` (label → packed id keys,
//! exact string match only). Packed keys are the numeric id, with bit 63 set
//! for property ids. The store is rebuilt from scratch by
//! [`build_label_store`]; it is never edited in place.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use redb::{
    Database, MultimapTableDefinition, ReadOnlyDatabase, ReadOnlyMultimapTable, ReadOnlyTable, ReadableDatabase, ReadableTable, TableDefinition,
};

use super::record::{resolve_label, EntityRecord, DEFAULT_LANGUAGE_CHAIN};
use super::shard::ShardReader;
use crate::error::{Error, Result};
use crate::ids::Ident;

const LABELS: TableDefinition<u64, &str> = TableDefinition::new("labels");
const BY_LABEL: MultimapTableDefinition<&str, u64> = MultimapTableDefinition::new("by_label");

/// Read-only label resolution. A missing id is `None`, never an empty string.
pub trait LabelLookup: Sync {
    fn label(&self, id: Ident) -> Option<String>;

    /// Ids whose label is exactly `label`.
    fn ids_for_label(&self, _label: &str) -> Vec<Ident> {
        Vec::new()
    }

    fn contains(&self, id: Ident) -> bool {
        self.label(id).is_some()
    }
}

/// A lookup that knows nothing.
pub struct NoLabels;

impl LabelLookup for NoLabels {
    fn label(&self, _id: Ident) -> Option<String> {
        None
    }
}

/// In-memory labels, used for tests and small runs.
#[derive(Clone, Debug, Default)]
pub struct MemoryLabels {
    map: HashMap<u64, String>,
}

impl MemoryLabels {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: impl Into<Ident>, label: impl Into<String>) {
        self.map.insert(id.into().key(), label.into());
    }

    /// Insert only when `id` has no label yet.
    pub fn insert_missing(&mut self, id: impl Into<Ident>, label: impl Into<String>) {
        self.map.entry(id.into().key()).or_insert_with(|| label.into());
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Ident, &str)> {
        self.map.iter().map(|(k, v)| (Ident::from_key(*k), v.as_str()))
    }

    /// Add the resolved label of each record.
    pub fn extend_from_records<'a>(&mut self, records: impl IntoIterator<Item = &'a EntityRecord>) {
        for r in records {
            if let Some(l) = resolve_label(&r.labels, &DEFAULT_LANGUAGE_CHAIN) {
                self.insert_missing(r.id, l);
            }
        }
    }

    /// Add entries from a two-column tab-separated file (`id<TAB>label`),
    /// without overriding existing labels.
    pub fn extend_from_sidecar(&mut self, path: impl AsRef<Path>) -> Result<()> {
        for (id, label) in read_sidecar(path)? {
            self.insert_missing(id, label);
        }
        Ok(())
    }
}

impl LabelLookup for MemoryLabels {
    fn label(&self, id: Ident) -> Option<String> {
        self.map.get(&id.key()).cloned()
    }

    fn ids_for_label(&self, label: &str) -> Vec<Ident> {
        let mut out: Vec<Ident> = self
            .map
            .iter()
            .filter(|(_, v)| v.as_str() == label)
            .map(|(k, _)| Ident::from_key(*k))
            .collect();
        out.sort();
        out
    }
}

/// Parse a sidecar label file. Blank lines and lines starting with `#` are
/// ignored.
pub fn read_sidecar(path: impl AsRef<Path>) -> Result<Vec<(Ident, String)>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(Error::io(path))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(Error::io(path))?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse { file: path.to_path_buf(), line: Some(idx + 1), message };
        let (id, label) = line
            .split_once('\t')
            .ok_or_else(|| parse_err("expected `id<TAB>label`".into()))?;
        let id = Ident::parse(id.trim()).map_err(|e| parse_err(e.to_string()))?;
        out.push((id, label.trim().to_string()));
    }
    Ok(out)
}

/// Persistent label store backed by a redb file.
pub struct LabelStore {
    path: PathBuf,
    labels: ReadOnlyTable<u64, &'static str>,
    by_label: ReadOnlyMultimapTable<&'static str, u64>,
}

impl LabelStore {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        if !path.exists() {
            return Err(Error::LabelStore(format!("{} does not exist", path.display())));
        }
        // read-only, so opening never rewrites the file or its digest
        let db = ReadOnlyDatabase::open(&path)?;
        let txn = db.begin_read()?;
        let labels = txn.open_table(LABELS)?;
        let by_label = txn.open_multimap_table(BY_LABEL)?;
        Ok(LabelStore { path, labels, by_label })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> Result<u64> {
        Ok(redb::ReadableTableMetadata::len(&self.labels)?)
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(self.len()? == 0)
    }

    /// Every entry in key order. Used for determinism checks and export.
    pub fn entries(&self) -> Result<Vec<(Ident, String)>> {
        let mut out = Vec::new();
        for row in self.labels.iter()? {
            let (k, v) = row?;
            out.push((Ident::from_key(k.value()), v.value().to_string()));
        }
        Ok(out)
    }
}

impl LabelLookup for LabelStore {
    fn label(&self, id: Ident) -> Option<String> {
        self.labels
            .get(id.key())
            .ok()
            .flatten()
            .map(|g| g.value().to_string())
    }

    fn ids_for_label(&self, label: &str) -> Vec<Ident> {
        let Ok(values) = self.by_label.get(label) else {
            return Vec::new();
        };
        values
            .filter_map(|v| v.ok())
            .map(|v| Ident::from_key(v.value()))
            .collect()
    }
}

/// Build (or rebuild) a label store from dump shards and an optional sidecar
/// label file. Labels from the dump win over sidecar entries; within the dump
/// the first shard (in the given order) to carry an id wins.
pub fn build_label_store(shards: &[PathBuf], sidecar: Option<&Path>, out: impl AsRef<Path>) -> Result<LabelStore> {
    let out = out.as_ref();
    if out.exists() {
        fs::remove_file(out).map_err(Error::io(out))?;
    }
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(Error::io(parent))?;
    }
    let db = Database::create(out)?;
    let txn = db.begin_write()?;
    {
        let mut labels = txn.open_table(LABELS)?;
        let mut by_label = txn.open_multimap_table(BY_LABEL)?;
        let batch = rayon::current_num_threads().max(1);
        for chunk in shards.chunks(batch) {
            let parsed: Vec<Result<Vec<(u64, String)>>> = chunk.par_iter().map(|p| shard_labels(p)).collect();
            for entries in parsed {
                for (key, label) in entries? {
                    if labels.get(key)?.is_none() {
                        labels.insert(key, label.as_str())?;
                        by_label.insert(label.as_str(), key)?;
                    }
                }
            }
        }
        if let Some(sidecar) = sidecar {
            for (id, label) in read_sidecar(sidecar)? {
                let key = id.key();
                if labels.get(key)?.is_none() {
                    labels.insert(key, label.as_str())?;
                    by_label.insert(label.as_str(), key)?;
                }
            }
        }
    }
    txn.commit()?;
    drop(db);
    LabelStore::open(out)
}

fn shard_labels(path: &Path) -> Result<Vec<(u64, String)>> {
    let mut out = Vec::new();
    for r in ShardReader::open(path)? {
        let r = r?;
        if let Some(l) = resolve_label(&r.labels, &DEFAULT_LANGUAGE_CHAIN) {
            out.push((r.id.key(), l.to_string()));
        }
    }
    Ok(out)
}
