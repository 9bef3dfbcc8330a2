use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::classifier::ClassifiedRecord;
use crate::ids::{Ident, Qid};
use crate::ingest::{LabelLookup, SampleInstance};

pub const MAX_SAMPLES: usize = 5;

/// An entity type proposed for gating.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateType {
    pub type_id: Qid,
    pub label: Option<String>,
    /// Unclassified entities carrying the type.
    pub unclassified_count: u64,
    /// Relational references from classified entities to unclassified
    /// entities carrying the type.
    pub inbound_refs: u64,
    pub samples: Vec<SampleInstance>,
}

fn top_k(counts: &HashMap<Qid, u64>, k: usize) -> Vec<Qid> {
    let mut v: Vec<(Qid, u64)> = counts.iter().map(|(t, c)| (*t, *c)).collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    v.into_iter().take(k).map(|(t, _)| t).collect()
}

/// Union of the `k_freq` types with the most unclassified instances and the
/// `k_hub` types most referenced by classified entities, frequency picks
/// first. Ties go to the smaller id.
pub fn candidate_types(records: &[ClassifiedRecord], labels: &dyn LabelLookup, k_freq: usize, k_hub: usize) -> Vec<CandidateType> {
    let mut unclassified: HashMap<Qid, &ClassifiedRecord> = HashMap::new();
    let mut freq: HashMap<Qid, u64> = HashMap::new();
    let mut types_of: HashMap<Qid, BTreeSet<Qid>> = HashMap::new();
    for r in records.iter().filter(|r| r.category.is_none()) {
        let types: BTreeSet<Qid> = r.type_values().collect();
        for t in &types {
            *freq.entry(*t).or_default() += 1;
        }
        unclassified.insert(r.id, r);
        types_of.insert(r.id, types);
    }

    let mut hubs: HashMap<Qid, u64> = HashMap::new();
    for r in records.iter().filter(|r| r.category.is_some()) {
        for c in &r.buckets.relational {
            let Some(target) = c.value.entity() else { continue };
            if let Some(types) = types_of.get(&target) {
                for t in types {
                    *hubs.entry(*t).or_default() += 1;
                }
            }
        }
    }

    let mut chosen = top_k(&freq, k_freq);
    for t in top_k(&hubs, k_hub) {
        if !chosen.contains(&t) {
            chosen.push(t);
        }
    }

    let mut samples: BTreeMap<Qid, Vec<SampleInstance>> = BTreeMap::new();
    let mut ids: Vec<Qid> = unclassified.keys().copied().collect();
    ids.sort_unstable();
    for id in ids {
        let r = unclassified[&id];
        for t in &types_of[&id] {
            if !chosen.contains(t) {
                continue;
            }
            let v = samples.entry(*t).or_default();
            if v.len() < MAX_SAMPLES {
                v.push(SampleInstance { id, label: r.label.clone(), description: r.description.clone() });
            }
        }
    }

    chosen
        .into_iter()
        .map(|t| CandidateType {
            type_id: t,
            label: labels.label(Ident::Item(t)),
            unclassified_count: freq.get(&t).copied().unwrap_or(0),
            inbound_refs: hubs.get(&t).copied().unwrap_or(0),
            samples: samples.remove(&t).unwrap_or_default(),
        })
        .collect()
}
