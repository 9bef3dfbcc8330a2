use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::columnar::{part_name, write_classified};
use super::engine::{ClassifiedRecord, Classifier};
use super::stats::ClassStats;
use crate::cleaning::CoreIdSet;
use crate::error::{Error, Result};
use crate::ingest::{EntityRecord, LabelLookup, ShardReader};
use crate::schema::SchemaConfig;

/// Stats file written next to the part files.
pub const STATS_FILE: &str = "class_stats.json";

/// Classify in-memory records. Non-item records are skipped.
pub fn classify_records<'a>(
    records: impl IntoIterator<Item = &'a EntityRecord>,
    schema: &SchemaConfig,
    labels: &dyn LabelLookup,
) -> (Vec<ClassifiedRecord>, ClassStats) {
    let classifier = Classifier::new(schema);
    let mut stats = ClassStats::for_schema(schema);
    let mut out = Vec::new();
    for r in records {
        if r.item().is_none() {
            continue;
        }
        let c = classifier.classify(r, labels);
        stats.observe(&c);
        out.push(c);
    }
    stats.finish();
    (out, stats)
}

/// Classify every core entity of every shard, in parallel across shards.
///
/// With `out` set, shard `i` is written to `part-0000i.parquet` and the
/// merged stats to [`STATS_FILE`]. Stats are merged in shard order, so the
/// result does not depend on scheduling. Without a core set every item is
/// classified.
pub fn classify_shards(
    shards: &[PathBuf],
    core: Option<&CoreIdSet>,
    schema: &SchemaConfig,
    labels: &dyn LabelLookup,
    out: Option<&Path>,
) -> Result<ClassStats> {
    let classifier = Classifier::new(schema);
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(Error::io(dir))?;
        for p in super::columnar::list_parts(dir)? {
            fs::remove_file(&p).map_err(Error::io(&p))?;
        }
    }
    let parts: Vec<Result<ClassStats>> = shards
        .par_iter()
        .enumerate()
        .map(|(i, path)| {
            let mut stats = ClassStats::default();
            let mut rows = Vec::new();
            let mut reader = ShardReader::open(path)?;
            for r in reader.by_ref() {
                let r = r?;
                let Some(id) = r.item() else { continue };
                if core.is_some_and(|c| !c.contains(id)) {
                    stats.non_core += 1;
                    continue;
                }
                let mut c = classifier.classify(&r, labels);
                c.shard = i as u32;
                stats.observe(&c);
                if out.is_some() {
                    rows.push(c);
                }
            }
            stats.shards = reader.stats();
            if let Some(dir) = out {
                write_classified(dir.join(part_name(i)), &rows)?;
            }
            Ok(stats)
        })
        .collect();

    let mut stats = ClassStats::for_schema(schema);
    for p in parts {
        stats.merge(&p?);
    }
    stats.finish();
    if let Some(dir) = out {
        write_stats(&stats, dir.join(STATS_FILE))?;
    }
    Ok(stats)
}

pub fn write_stats(stats: &ClassStats, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, serde_json::to_string_pretty(stats)?).map_err(Error::io(path))
}

pub fn read_stats(path: impl AsRef<Path>) -> Result<ClassStats> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    Ok(serde_json::from_str(&text)?)
}
