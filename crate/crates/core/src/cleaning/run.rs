use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cascade::{clean_entity, CleaningVerdict, Decision, Tier};
use super::rules::CleaningRules;
use crate::error::{Error, Result};
use crate::ids::Qid;
use crate::ingest::{EntityRecord, ShardReader, ShardStats};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningStats {
    pub total: u64,
    pub core: u64,
    pub non_core: u64,
    pub structural: u64,
    pub signature: u64,
    pub ratio_net: u64,
    pub default_core: u64,
    /// Core entities kept by their curation score despite a bulk-import match.
    pub protected: u64,
    /// Non-core decisions per matched rule.
    pub by_rule: BTreeMap<String, u64>,
    /// Property entities and other non-item records, not cleaned.
    pub non_items: u64,
    pub shards: ShardStats,
}

impl CleaningStats {
    pub fn observe(&mut self, v: &CleaningVerdict) {
        self.total += 1;
        match v.decision {
            Decision::Core => self.core += 1,
            Decision::NonCore => self.non_core += 1,
        }
        match v.tier {
            Tier::Structural => self.structural += 1,
            Tier::Signature => self.signature += 1,
            Tier::RatioNet => self.ratio_net += 1,
            Tier::DefaultCore => self.default_core += 1,
        }
        if v.protected {
            self.protected += 1;
        }
        if v.decision == Decision::NonCore {
            if let Some(rule) = &v.matched_rule {
                *self.by_rule.entry(rule.clone()).or_default() += 1;
            }
        }
    }

    pub fn merge(&mut self, o: &CleaningStats) {
        self.total += o.total;
        self.core += o.core;
        self.non_core += o.non_core;
        self.structural += o.structural;
        self.signature += o.signature;
        self.ratio_net += o.ratio_net;
        self.default_core += o.default_core;
        self.protected += o.protected;
        for (k, v) in &o.by_rule {
            *self.by_rule.entry(k.clone()).or_default() += v;
        }
        self.non_items += o.non_items;
        self.shards.merge(&o.shards);
    }
}

/// Sorted set of core entity ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoreIdSet {
    ids: Vec<Qid>,
}

impl CoreIdSet {
    pub fn from_ids(ids: impl IntoIterator<Item = Qid>) -> Self {
        let mut ids: Vec<Qid> = ids.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        CoreIdSet { ids }
    }

    pub fn contains(&self, id: Qid) -> bool {
        self.ids.binary_search(&id).is_ok()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Qid> + '_ {
        self.ids.iter().copied()
    }

    /// One id per line, ascending numeric order.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(Error::io(path))?;
        let mut w = BufWriter::new(file);
        for id in &self.ids {
            writeln!(w, "{id}").map_err(Error::io(path))?;
        }
        w.flush().map_err(Error::io(path))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(Error::io(path))?;
        let mut ids = Vec::new();
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(Error::io(path))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            ids.push(line.parse().map_err(|e: Error| Error::Parse {
                file: path.to_path_buf(),
                line: Some(idx + 1),
                message: e.to_string(),
            })?);
        }
        Ok(Self::from_ids(ids))
    }
}

/// Clean in-memory records, returning verdicts in input order.
pub fn clean_records<'a>(
    records: impl IntoIterator<Item = &'a EntityRecord>,
    rules: &CleaningRules,
) -> (Vec<(Qid, CleaningVerdict)>, CleaningStats) {
    let mut stats = CleaningStats::default();
    let mut out = Vec::new();
    for r in records {
        let Some(id) = r.item() else {
            stats.non_items += 1;
            continue;
        };
        let v = clean_entity(r, rules);
        stats.observe(&v);
        out.push((id, v));
    }
    (out, stats)
}

/// Clean every shard in parallel. Per-shard statistics are merged in shard
/// order and core ids are unioned, so the result is independent of
/// scheduling.
pub fn clean_shards(shards: &[PathBuf], rules: &CleaningRules) -> Result<(CoreIdSet, CleaningStats)> {
    rules.validate()?;
    let parts: Vec<Result<(Vec<Qid>, CleaningStats)>> = shards
        .par_iter()
        .map(|path| {
            let mut reader = ShardReader::open(path)?;
            let mut stats = CleaningStats::default();
            let mut core = Vec::new();
            for r in reader.by_ref() {
                let r = r?;
                let Some(id) = r.item() else {
                    stats.non_items += 1;
                    continue;
                };
                let v = clean_entity(&r, rules);
                stats.observe(&v);
                if v.decision == Decision::Core {
                    core.push(id);
                }
            }
            stats.shards = reader.stats();
            Ok((core, stats))
        })
        .collect();

    let mut stats = CleaningStats::default();
    let mut core = Vec::new();
    for part in parts {
        let (ids, s) = part?;
        stats.merge(&s);
        core.extend(ids);
    }
    Ok((CoreIdSet::from_ids(core), stats))
}
