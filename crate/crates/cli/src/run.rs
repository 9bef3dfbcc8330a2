//! Run directory layout and the operations the CLI and the HTTP service
//! share, so both render from the same persisted files.
//!
//! ```text
//! <run>/manifest.json
//! <run>/core.ids                  clean
//! <run>/stats/cleaning.json       clean
//! <run>/classified/*.parquet      classify, refine, apply
//! <run>/classified/class_stats.json
//! <run>/schema/{initial,current}/ refine
//! <run>/rounds/round-NNN.json     refine
//! <run>/review.jsonl              review journal
//! <run>/stats/analysis.json       analyze
//! <run>/stats/spans.jsonl         analyze
//! <run>/stats/audit.json          audit
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use kgroute::classifier::{read_stats, ClassStats, STATS_FILE};
use kgroute::cleaning::CoreIdSet;
use kgroute::ingest::{list_shards, LabelLookup, LabelStore, MemoryLabels};
use kgroute::refinement::{apply_reviewed, overlay_reviews, Applied, ReviewJournal, RoundStatus, RunStore, ShardCorpus};
use kgroute::schema::{load_schema, SchemaConfig};
use kgroute::ids::Ident;
use serde::Serialize;

use crate::manifest::{now_millis, RunManifest};

pub const CORE_IDS: &str = "core.ids";
pub const CLASSIFIED: &str = "classified";
pub const STATS: &str = "stats";

#[derive(Clone, Debug)]
pub struct RunDir {
    pub root: PathBuf,
}

impl RunDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        RunDir { root: root.into() }
    }

    pub fn store(&self) -> RunStore {
        RunStore::new(&self.root)
    }

    pub fn core_ids(&self) -> PathBuf {
        self.root.join(CORE_IDS)
    }

    pub fn classified(&self) -> PathBuf {
        self.root.join(CLASSIFIED)
    }

    pub fn class_stats(&self) -> PathBuf {
        self.classified().join(STATS_FILE)
    }

    pub fn stats(&self, name: &str) -> PathBuf {
        self.root.join(STATS).join(name)
    }

    pub fn read_class_stats(&self) -> Result<ClassStats> {
        let p = self.class_stats();
        read_stats(&p).with_context(|| format!("no classification stats at {}", p.display()))
    }

    /// Core set written by `clean`, if any.
    pub fn core(&self) -> Result<Option<CoreIdSet>> {
        let p = self.core_ids();
        if p.exists() {
            Ok(Some(CoreIdSet::read(&p)?))
        } else {
            Ok(None)
        }
    }

    /// The refined schema when refinement has run, else the schema input.
    pub fn schema(&self, manifest: &RunManifest) -> Result<SchemaConfig> {
        let current = self.store().current_schema_dir();
        if current.exists() {
            return Ok(load_schema(current)?);
        }
        Ok(load_schema(manifest.input("schema")?)?)
    }

    pub fn corpus(&self, manifest: &RunManifest) -> Result<ShardCorpus> {
        Ok(ShardCorpus {
            shards: list_shards(manifest.input("shards")?)?,
            core: self.core()?,
            out: self.classified(),
        })
    }
}

/// A label store file, or a two-column sidecar when the path ends in `.tsv`.
pub enum Labels {
    Store(LabelStore),
    Sidecar(MemoryLabels),
}

impl Labels {
    pub fn open(path: &Path) -> Result<Self> {
        if path.extension().is_some_and(|e| e == "tsv") {
            let mut m = MemoryLabels::new();
            m.extend_from_sidecar(path)?;
            Ok(Labels::Sidecar(m))
        } else {
            Ok(Labels::Store(LabelStore::open(path)?))
        }
    }
}

impl LabelLookup for Labels {
    fn label(&self, id: Ident) -> Option<String> {
        match self {
            Labels::Store(s) => s.label(id),
            Labels::Sidecar(m) => m.label(id),
        }
    }

    fn ids_for_label(&self, label: &str) -> Vec<Ident> {
        match self {
            Labels::Store(s) => s.ids_for_label(label),
            Labels::Sidecar(m) => m.ids_for_label(label),
        }
    }
}

/// Whether the round awaiting review has accepted decisions to apply.
pub fn has_accepted(run: &RunDir) -> Result<bool> {
    let store = run.store();
    let Some(mut round) = store.read_rounds()?.pop() else { return Ok(false) };
    if round.status != RoundStatus::AwaitingReview {
        return Ok(false);
    }
    let journal = ReviewJournal::open(store.journal_path())?;
    overlay_reviews(&mut round.decisions, &journal);
    Ok(round.decisions.iter().any(|d| d.enters_diff()))
}

#[derive(Clone, Debug, Serialize)]
pub struct ApplySummary {
    pub round: usize,
    pub status: RoundStatus,
    pub edits: usize,
    pub r_c: Option<f64>,
    pub r_m: Option<f64>,
    pub schema_version: Option<String>,
}

/// Apply the accepted decisions of the round awaiting review and
/// reclassify. Records an `apply` stage in the manifest.
pub fn apply_accepted(run: &RunDir) -> Result<ApplySummary> {
    let started = now_millis();
    let mut manifest = RunManifest::load(&run.root)?;
    if !has_accepted(run)? {
        bail!("no accepted decisions to apply");
    }
    let labels = Labels::open(&manifest.input("labels")?)?;
    let corpus = run.corpus(&manifest)?;
    let (round, applied) = apply_reviewed(&run.store(), &corpus, &labels)?;
    let mut summary = ApplySummary {
        round: round.index,
        status: round.status,
        edits: round.diff.edit_count(),
        r_c: round.after.as_ref().map(|a| a.r_c),
        r_m: round.after.as_ref().map(|a| a.r_m),
        schema_version: None,
    };
    if let Applied::Done { schema, .. } = &applied {
        summary.schema_version = Some(schema.version.clone());
        manifest.schema_version = Some(schema.version.clone());
    }
    manifest.stage("apply", started, &["shards", "labels"], &[("classified", CLASSIFIED), ("round", &format!("rounds/round-{:03}.json", round.index))]);
    manifest.save(&run.root)?;
    Ok(summary)
}
