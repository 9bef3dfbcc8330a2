use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::candidates::{candidate_types, CandidateType, MAX_SAMPLES};
use super::decision::{accepted_diff, Evidence, OracleDecision, ReviewState};
use super::failures::{compute_failures, FailureSets};
use super::oracle::{summarize, Oracle, OracleRequest, PropertyCount, RequestBody};
use super::review::ReviewJournal;
use crate::classifier::{classify_records, classify_shards, read_classified_dir, ClassStats, ClassifiedRecord};
use crate::cleaning::CoreIdSet;
use crate::error::{Error, Result};
use crate::ids::{Ident, Pid};
use crate::ingest::{EntityRecord, LabelLookup, SampleInstance};
use crate::schema::{apply_diff, load_schema, validate_schema, write_schema, SchemaConfig, SchemaDiff, Violation};

/// Something that can be (re)classified under a schema.
pub trait Corpus {
    fn classify(&self, schema: &SchemaConfig, labels: &dyn LabelLookup) -> Result<(Vec<ClassifiedRecord>, ClassStats)>;
}

pub struct MemoryCorpus {
    pub records: Vec<EntityRecord>,
}

impl Corpus for MemoryCorpus {
    fn classify(&self, schema: &SchemaConfig, labels: &dyn LabelLookup) -> Result<(Vec<ClassifiedRecord>, ClassStats)> {
        Ok(classify_records(&self.records, schema, labels))
    }
}

/// Dump shards, classified into `out` on every pass.
pub struct ShardCorpus {
    pub shards: Vec<PathBuf>,
    pub core: Option<CoreIdSet>,
    pub out: PathBuf,
}

impl Corpus for ShardCorpus {
    fn classify(&self, schema: &SchemaConfig, labels: &dyn LabelLookup) -> Result<(Vec<ClassifiedRecord>, ClassStats)> {
        let stats = classify_shards(&self.shards, self.core.as_ref(), schema, labels, Some(&self.out))?;
        Ok((read_classified_dir(&self.out)?, stats))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineConfig {
    pub theta_c: f64,
    pub theta_m: f64,
    /// Upper bound on rounds that consult the oracle.
    pub max_rounds: usize,
    pub k_freq: usize,
    pub k_hub: usize,
    /// Accept every actionable decision without waiting for review.
    pub auto_accept: bool,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig { theta_c: 0.9, theta_m: 0.9, max_rounds: 10, k_freq: 20, k_hub: 20, auto_accept: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundStatus {
    /// Thresholds met before consulting the oracle.
    Converged,
    Applied,
    NoAcceptedDecisions,
    AwaitingReview,
    RolledBack,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementRound {
    pub index: usize,
    pub theta_c: f64,
    pub theta_m: f64,
    pub schema_version: String,
    pub before: FailureSets,
    /// From a real reclassification pass after the diff was applied.
    pub after: Option<FailureSets>,
    pub candidates: Vec<CandidateType>,
    pub decisions: Vec<OracleDecision>,
    /// The diff actually applied (empty unless status is `applied`).
    pub diff: SchemaDiff,
    pub status: RoundStatus,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<Violation>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    NoAcceptedDecisions,
    AwaitingReview,
    RolledBack,
    MaxRounds,
}

#[derive(Clone, Debug)]
pub struct RefineOutcome {
    pub schema: SchemaConfig,
    pub rounds: Vec<RefinementRound>,
    pub stop: StopReason,
    pub stats: ClassStats,
}

/// Layout of a run directory.
#[derive(Clone, Debug)]
pub struct RunStore {
    root: PathBuf,
}

impl RunStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        RunStore { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn rounds_dir(&self) -> PathBuf {
        self.root.join("rounds")
    }

    pub fn round_path(&self, index: usize) -> PathBuf {
        self.rounds_dir().join(format!("round-{index:03}.json"))
    }

    pub fn initial_schema_dir(&self) -> PathBuf {
        self.root.join("schema").join("initial")
    }

    pub fn current_schema_dir(&self) -> PathBuf {
        self.root.join("schema").join("current")
    }

    pub fn classified_dir(&self) -> PathBuf {
        self.root.join("classified")
    }

    pub fn journal_path(&self) -> PathBuf {
        self.root.join("review.jsonl")
    }

    pub fn write_round(&self, round: &RefinementRound) -> Result<()> {
        let dir = self.rounds_dir();
        fs::create_dir_all(&dir).map_err(Error::io(&dir))?;
        let path = self.round_path(round.index);
        fs::write(&path, serde_json::to_string_pretty(round)?).map_err(Error::io(&path))
    }

    pub fn read_rounds(&self) -> Result<Vec<RefinementRound>> {
        let dir = self.rounds_dir();
        if !dir.exists() {
            return Ok(Vec::new());
        }
        let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
            .map_err(Error::io(&dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        paths
            .iter()
            .map(|p| {
                let text = fs::read_to_string(p).map_err(Error::io(p))?;
                Ok(serde_json::from_str(&text)?)
            })
            .collect()
    }

    pub fn write_schema(&self, schema: &SchemaConfig, initial: bool) -> Result<()> {
        let dir = if initial { self.initial_schema_dir() } else { self.current_schema_dir() };
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(Error::io(&dir))?;
        }
        write_schema(schema, dir)
    }

    pub fn current_schema(&self) -> Result<SchemaConfig> {
        load_schema(self.current_schema_dir())
    }
}

const MAX_MODULE_PROPERTIES: usize = 10;

fn module_requests(records: &[ClassifiedRecord], schema: &SchemaConfig, labels: &dyn LabelLookup) -> Vec<(OracleRequest, Evidence)> {
    let mut out = Vec::new();
    for c in &schema.categories {
        let stuck: Vec<&ClassifiedRecord> = records
            .iter()
            .filter(|r| r.category.as_deref() == Some(c.id.as_str()) && r.modules().next().is_none())
            .collect();
        if stuck.is_empty() {
            continue;
        }
        let mut counts: std::collections::HashMap<Pid, u64> = Default::default();
        for r in &stuck {
            let props: std::collections::BTreeSet<Pid> = r.buckets.iter().map(|(_, c)| c.property).collect();
            for p in props {
                *counts.entry(p).or_default() += 1;
            }
        }
        let mut props: Vec<(Pid, u64)> = counts.into_iter().collect();
        props.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let properties = props
            .into_iter()
            .take(MAX_MODULE_PROPERTIES)
            .map(|(p, count)| PropertyCount { property: p, label: labels.label(Ident::Property(p)), count })
            .collect();
        let mut samples: Vec<SampleInstance> = stuck
            .iter()
            .map(|r| SampleInstance { id: r.id, label: r.label.clone(), description: r.description.clone() })
            .collect();
        samples.sort_by_key(|s| s.id);
        samples.truncate(MAX_SAMPLES);
        let evidence = Evidence {
            subject_label: None,
            unclassified_count: 0,
            inbound_refs: 0,
            samples: samples.clone(),
        };
        let request = OracleRequest {
            subject: c.id.clone(),
            body: RequestBody::Module {
                no_module_count: stuck.len() as u64,
                properties,
                samples,
                modules: summarize(schema)
                    .into_iter()
                    .find(|s| s.id == c.id)
                    .map(|s| s.modules)
                    .unwrap_or_default(),
            },
        };
        out.push((request, evidence));
    }
    out
}

/// Ask the oracle about every candidate type, every category with
/// module-less entities, and once about module restructuring.
pub fn consult_oracles(
    round: usize,
    failures: &FailureSets,
    candidates: &[CandidateType],
    records: &[ClassifiedRecord],
    schema: &SchemaConfig,
    labels: &dyn LabelLookup,
    oracle: &mut dyn Oracle,
) -> Vec<OracleDecision> {
    let categories = summarize(schema);
    let mut requests: Vec<(OracleRequest, Evidence)> = candidates
        .iter()
        .map(|c| {
            let evidence = Evidence {
                subject_label: labels.label(Ident::Item(c.type_id)),
                unclassified_count: c.unclassified_count,
                inbound_refs: c.inbound_refs,
                samples: c.samples.clone(),
            };
            let req = OracleRequest {
                subject: c.type_id.to_string(),
                body: RequestBody::Category { candidate: c.clone(), categories: categories.clone() },
            };
            (req, evidence)
        })
        .collect();
    requests.extend(module_requests(records, schema, labels));
    requests.push((
        OracleRequest {
            subject: "schema".into(),
            body: RequestBody::Refinement { round, r_c: failures.r_c, r_m: failures.r_m, categories },
        },
        Evidence::default(),
    ));

    requests
        .into_iter()
        .enumerate()
        .map(|(n, (req, evidence))| {
            let answer = oracle.consult(&req);
            OracleDecision::intake(format!("r{round}-{n}"), round, req.kind(), &req.subject, answer, evidence, schema, labels)
        })
        .collect()
}

/// Outcome of applying a round's accepted decisions.
#[allow(clippy::large_enum_variant)]
pub enum Applied {
    Nothing,
    RolledBack(Vec<Violation>),
    Done { schema: SchemaConfig, records: Vec<ClassifiedRecord>, stats: ClassStats },
}

/// Apply accepted decisions of `round` to `schema`, validate, and reclassify.
/// Updates the round's diff, status and after-rates in place.
pub fn apply_round(
    round: &mut RefinementRound,
    schema: &SchemaConfig,
    corpus: &dyn Corpus,
    labels: &dyn LabelLookup,
) -> Result<Applied> {
    let diff = accepted_diff(&round.decisions);
    if diff.is_empty() {
        round.status = RoundStatus::NoAcceptedDecisions;
        return Ok(Applied::Nothing);
    }
    let mut next = apply_diff(schema, &diff)?;
    next.version = format!("{}+r{}", base_version(&schema.version), round.index);
    let report = validate_schema(&next, labels);
    if !report.is_valid() {
        round.status = RoundStatus::RolledBack;
        round.violations = report.violations.clone();
        return Ok(Applied::RolledBack(report.violations));
    }
    let (records, stats) = corpus.classify(&next, labels)?;
    round.diff = diff;
    round.after = Some(compute_failures(&stats));
    round.status = RoundStatus::Applied;
    Ok(Applied::Done { schema: next, records, stats })
}

fn base_version(v: &str) -> &str {
    v.split("+r").next().unwrap_or(v)
}

/// Iterative refinement: classify, find failures, consult the oracle, apply
/// accepted edits, reclassify, until both rates reach their thresholds, a
/// round yields nothing to apply, or `max_rounds` oracle rounds have run.
pub fn refine(
    corpus: &dyn Corpus,
    s0: &SchemaConfig,
    labels: &dyn LabelLookup,
    oracle: &mut dyn Oracle,
    cfg: &RefineConfig,
    store: Option<&RunStore>,
) -> Result<RefineOutcome> {
    let mut schema = s0.clone();
    if let Some(st) = store {
        st.write_schema(&schema, true)?;
        st.write_schema(&schema, false)?;
    }
    let (mut records, mut stats) = corpus.classify(&schema, labels)?;
    let mut rounds = Vec::new();
    let mut index = 0;
    let stop = loop {
        let before = compute_failures(&stats);
        let mut round = RefinementRound {
            index,
            theta_c: cfg.theta_c,
            theta_m: cfg.theta_m,
            schema_version: schema.version.clone(),
            before: before.clone(),
            after: None,
            candidates: Vec::new(),
            decisions: Vec::new(),
            diff: SchemaDiff::default(),
            status: RoundStatus::Converged,
            violations: Vec::new(),
        };
        if before.meets(cfg.theta_c, cfg.theta_m) {
            persist(store, &round)?;
            rounds.push(round);
            break StopReason::Converged;
        }
        if index >= cfg.max_rounds {
            break StopReason::MaxRounds;
        }

        round.candidates = candidate_types(&records, labels, cfg.k_freq, cfg.k_hub);
        round.decisions = consult_oracles(index, &before, &round.candidates, &records, &schema, labels, oracle);
        if !cfg.auto_accept {
            round.status = RoundStatus::AwaitingReview;
            persist(store, &round)?;
            rounds.push(round);
            break StopReason::AwaitingReview;
        }
        for d in &mut round.decisions {
            d.review = if d.is_actionable() { ReviewState::Accepted } else { ReviewState::Rejected };
        }

        let applied = apply_round(&mut round, &schema, corpus, labels)?;
        persist(store, &round)?;
        rounds.push(round);
        match applied {
            Applied::Nothing => break StopReason::NoAcceptedDecisions,
            Applied::RolledBack(_) => break StopReason::RolledBack,
            Applied::Done { schema: s, records: r, stats: st } => {
                schema = s;
                records = r;
                stats = st;
                if let Some(store) = store {
                    store.write_schema(&schema, false)?;
                }
            }
        }
        index += 1;
    };
    Ok(RefineOutcome { schema, rounds, stop, stats })
}

fn persist(store: Option<&RunStore>, round: &RefinementRound) -> Result<()> {
    match store {
        Some(s) => s.write_round(round),
        None => Ok(()),
    }
}

/// Apply the reviewed decisions of the last round awaiting review, using
/// the states recorded in the run's review journal.
pub fn apply_reviewed(store: &RunStore, corpus: &dyn Corpus, labels: &dyn LabelLookup) -> Result<(RefinementRound, Applied)> {
    let mut rounds = store.read_rounds()?;
    let mut round = rounds
        .pop()
        .filter(|r| r.status == RoundStatus::AwaitingReview)
        .ok_or_else(|| Error::Structure("no round is awaiting review".into()))?;
    let journal = ReviewJournal::open(store.journal_path())?;
    overlay_reviews(&mut round.decisions, &journal);
    let schema = store.current_schema()?;
    let applied = apply_round(&mut round, &schema, corpus, labels)?;
    if let Applied::Done { schema, .. } = &applied {
        store.write_schema(schema, false)?;
    }
    if !matches!(applied, Applied::Nothing) {
        store.write_round(&round)?;
    }
    Ok((round, applied))
}

/// Copy journal states onto decisions.
pub fn overlay_reviews(decisions: &mut [OracleDecision], journal: &ReviewJournal) {
    for d in decisions {
        if let Some(e) = journal.get(&d.id) {
            d.review = e.state;
            d.note = e.note.clone();
        }
    }
}

/// Re-apply the diffs of applied rounds to `s0`.
pub fn replay(s0: &SchemaConfig, rounds: &[RefinementRound]) -> Result<SchemaConfig> {
    let mut s = s0.clone();
    for r in rounds.iter().filter(|r| r.status == RoundStatus::Applied) {
        s = apply_diff(&s, &r.diff)?;
        s.version = format!("{}+r{}", base_version(&s0.version), r.index);
    }
    Ok(s)
}
