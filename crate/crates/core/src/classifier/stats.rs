use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::engine::ClassifiedRecord;
use crate::ids::Qid;
use crate::ingest::ShardStats;
use crate::schema::SchemaConfig;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BucketCounts {
    pub core: u64,
    pub intrinsic: u64,
    pub relational: u64,
    pub unclaimed: u64,
}

/// Aggregate outcome of a classification pass.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub total: u64,
    pub classified: u64,
    /// Classified entities with at least one module.
    pub with_modules: u64,
    pub r_c: f64,
    pub r_m: f64,
    /// Set when the pass saw no entities; rates are then 1 and 0.
    pub empty_input: bool,
    pub per_category: BTreeMap<String, u64>,
    pub per_module: BTreeMap<String, BTreeMap<String, u64>>,
    /// Instance-of / subclass-of values of unclassified entities, each type
    /// counted once per entity.
    pub unclassified_types: BTreeMap<Qid, u64>,
    pub unclassified_ids: Vec<Qid>,
    pub no_module_ids: Vec<Qid>,
    pub claims: u64,
    pub buckets: BucketCounts,
    pub label_misses: u64,
    /// Records skipped because they are not in the core set.
    pub non_core: u64,
    pub shards: ShardStats,
}

impl ClassStats {
    /// Empty stats with a zero row for every category and module.
    pub fn for_schema(schema: &SchemaConfig) -> Self {
        let mut s = ClassStats::default();
        for c in &schema.categories {
            s.per_category.insert(c.id.clone(), 0);
            s.per_module
                .insert(c.id.clone(), c.modules.iter().map(|m| (m.name.clone(), 0)).collect());
        }
        s.finish();
        s
    }

    pub fn observe(&mut self, r: &ClassifiedRecord) {
        self.total += 1;
        self.claims += r.buckets.len() as u64;
        self.buckets.core += r.buckets.core.len() as u64;
        self.buckets.intrinsic += r.buckets.intrinsic.len() as u64;
        self.buckets.relational += r.buckets.relational.len() as u64;
        self.buckets.unclaimed += r.buckets.unclaimed.len() as u64;
        self.label_misses += r.label_misses as u64;
        match &r.category {
            Some(c) => {
                self.classified += 1;
                *self.per_category.entry(c.clone()).or_default() += 1;
                let modules = self.per_module.entry(c.clone()).or_default();
                let mut any = false;
                for m in r.modules() {
                    *modules.entry(m.to_string()).or_default() += 1;
                    any = true;
                }
                if any {
                    self.with_modules += 1;
                } else {
                    self.no_module_ids.push(r.id);
                }
            }
            None => {
                self.unclassified_ids.push(r.id);
                let types: BTreeSet<Qid> = r.type_values().collect();
                for t in types {
                    *self.unclassified_types.entry(t).or_default() += 1;
                }
            }
        }
    }

    /// Add another partial. Call [`ClassStats::finish`] after the last merge.
    pub fn merge(&mut self, o: &ClassStats) {
        self.total += o.total;
        self.classified += o.classified;
        self.with_modules += o.with_modules;
        for (k, v) in &o.per_category {
            *self.per_category.entry(k.clone()).or_default() += v;
        }
        for (c, mods) in &o.per_module {
            let into = self.per_module.entry(c.clone()).or_default();
            for (m, v) in mods {
                *into.entry(m.clone()).or_default() += v;
            }
        }
        for (t, v) in &o.unclassified_types {
            *self.unclassified_types.entry(*t).or_default() += v;
        }
        self.unclassified_ids.extend(&o.unclassified_ids);
        self.no_module_ids.extend(&o.no_module_ids);
        self.claims += o.claims;
        self.buckets.core += o.buckets.core;
        self.buckets.intrinsic += o.buckets.intrinsic;
        self.buckets.relational += o.buckets.relational;
        self.buckets.unclaimed += o.buckets.unclaimed;
        self.label_misses += o.label_misses;
        self.non_core += o.non_core;
        self.shards.merge(&o.shards);
    }

    /// Sort id lists and recompute the rates.
    pub fn finish(&mut self) {
        self.unclassified_ids.sort_unstable();
        self.no_module_ids.sort_unstable();
        self.empty_input = self.total == 0;
        (self.r_c, self.r_m) = rates(self.total, self.unclassified_ids.len() as u64, self.no_module_ids.len() as u64);
    }
}

/// Classification and module-assignment rates from the failure-set sizes.
///
/// `r_c = 1 - unclassified/total`, taken as 1 on empty input;
/// `r_m = 1 - no_module/classified`, taken as 0 when nothing is classified.
pub fn rates(total: u64, unclassified: u64, no_module: u64) -> (f64, f64) {
    let r_c = if total == 0 { 1.0 } else { 1.0 - unclassified as f64 / total as f64 };
    let n_c = total - unclassified;
    let r_m = if n_c == 0 { 0.0 } else { 1.0 - no_module as f64 / n_c as f64 };
    (r_c, r_m)
}
