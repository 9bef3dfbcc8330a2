#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use kgroute::classifier::{Bucket, Classifier};
use kgroute::ids::{Pid, INSTANCE_OF, SUBCLASS_OF};
use kgroute::synth::{random_entity, random_schema, rng, Universe};
use kgroute::ingest::{read_shard, EntityRecord, MemoryLabels, Value};
use kgroute::schema::{load_schema, ModuleKind, SchemaConfig};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture_schema() -> SchemaConfig {
    load_schema(fixtures().join("schema")).expect("fixture schema loads")
}

pub fn fixture_labels() -> MemoryLabels {
    let mut m = MemoryLabels::new();
    m.extend_from_sidecar(fixtures().join("labels.tsv")).expect("sidecar loads");
    m
}

pub fn fixture_entity(name: &str) -> EntityRecord {
    let (mut records, stats) = read_shard(fixtures().join("entities").join(format!("{name}.jsonl"))).expect("entity fixture");
    assert_eq!(stats.skipped, 0);
    records.remove(0)
}

pub fn display_names() -> BTreeMap<String, String> {
    let text = std::fs::read_to_string(fixtures().join("display_names.json")).expect("display names");
    serde_json::from_str(&text).expect("display names parse")
}

// A deliberately plain evaluator working on id strings, used as the oracle
// for the compiled classifier.

fn entity_strings(e: &EntityRecord, p: &str) -> Vec<String> {
    e.claims
        .iter()
        .filter(|(q, _)| q.to_string() == p)
        .flat_map(|(_, vs)| vs.iter())
        .filter_map(|c| match &c.value {
            Value::Entity { id } => Some(id.to_string()),
            _ => None,
        })
        .collect()
}

fn has_property(e: &EntityRecord, p: &str) -> bool {
    e.claims.iter().any(|(q, vs)| q.to_string() == p && !vs.is_empty())
}

pub fn naive_category(schema: &SchemaConfig, e: &EntityRecord) -> Option<String> {
    let mut types = entity_strings(e, &INSTANCE_OF.to_string());
    types.extend(entity_strings(e, &SUBCLASS_OF.to_string()));
    for c in &schema.categories {
        if types.iter().any(|t| c.gate_values.contains(t)) {
            return Some(c.id.clone());
        }
    }
    None
}

pub fn naive_modules(schema: &SchemaConfig, category: &str, e: &EntityRecord) -> Vec<String> {
    let c = schema.category(category).expect("category");
    let mut out = Vec::new();
    for m in &c.modules {
        let fires = m.indicators.iter().any(|i| {
            if i.values.is_empty() {
                has_property(e, &i.property)
            } else {
                entity_strings(e, &i.property).iter().any(|v| i.values.contains(v))
            }
        });
        if fires {
            out.push(m.name.clone());
        }
    }
    out
}

/// (bucket name, owning module) for one claim.
pub fn naive_route(schema: &SchemaConfig, category: Option<&str>, active: &[String], p: Pid, v: &Value) -> (&'static str, Option<String>) {
    let Some(category) = category else {
        return ("unclaimed", None);
    };
    let c = schema.category(category).expect("category");
    let p = p.to_string();
    if c.core_properties.contains(&p) {
        return ("core", None);
    }
    for kind in [ModuleKind::Intrinsic, ModuleKind::Relational] {
        if kind == ModuleKind::Relational && !matches!(v, Value::Entity { .. }) {
            break;
        }
        for m in &c.modules {
            if m.kind == kind && active.contains(&m.name) && m.value_props.contains(&p) {
                let bucket = if kind == ModuleKind::Intrinsic { "intrinsic" } else { "relational" };
                return (bucket, Some(m.name.clone()));
            }
        }
    }
    ("unclaimed", None)
}

/// Relational edges by module, recomputed from raw records.
pub fn naive_edges(
    schema: &SchemaConfig,
    records: &[EntityRecord],
    core: &BTreeSet<String>,
    filter: Option<&BTreeSet<String>>,
) -> BTreeMap<String, Vec<(String, String)>> {
    let categories: BTreeMap<String, Option<String>> = records
        .iter()
        .map(|r| (r.id.to_string(), naive_category(schema, r)))
        .collect();
    let mut out: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
    for r in records {
        let Some(cat) = categories[&r.id.to_string()].as_deref() else { continue };
        let active = naive_modules(schema, cat, r);
        for (p, vs) in &r.claims {
            for c in vs {
                let (bucket, module) = naive_route(schema, Some(cat), &active, *p, &c.value);
                let (Some(module), Value::Entity { id }) = (module, &c.value) else { continue };
                if bucket != "relational" || filter.is_some_and(|f| !f.contains(&module)) {
                    continue;
                }
                let target = id.to_string();
                let unclassified_core = core.contains(&target) && categories.get(&target).map_or(true, Option::is_none);
                if unclassified_core {
                    continue;
                }
                out.entry(module).or_default().push((r.id.to_string(), target));
            }
        }
    }
    out
}

/// Partition and brute-force equivalence over one random world.
pub fn check_world(seed: u64, entities: usize) -> Result<(), String> {
    let u = Universe::default();
    let mut r = rng(seed);
    let schema = random_schema(&mut r, &u);
    let c = Classifier::new(&schema);
    let labels = u.label_store();
    for i in 0..entities {
        let e = random_entity(&mut r, &u, kgroute::ids::Qid(100_000 + i as u64));
        let out = c.classify(&e, &labels);
        let expect_cat = naive_category(&schema, &e);
        if out.category != expect_cat {
            return Err(format!("category {:?} != {:?} for {e:?}", out.category, expect_cat));
        }
        if out.buckets.len() != e.claim_count() {
            return Err(format!("bucket sizes {} != claims {}", out.buckets.len(), e.claim_count()));
        }
        let active = expect_cat.as_deref().map(|cat| naive_modules(&schema, cat, &e)).unwrap_or_default();
        let got: Vec<String> = out.modules().map(String::from).collect();
        let mut want_i = Vec::new();
        let mut want_r = Vec::new();
        if let Some(cat) = &expect_cat {
            for m in &active {
                let def = schema.category(cat).unwrap().module(m).unwrap();
                match def.kind {
                    kgroute::schema::ModuleKind::Intrinsic => want_i.push(m.clone()),
                    kgroute::schema::ModuleKind::Relational => want_r.push(m.clone()),
                }
            }
        }
        if out.intrinsic_modules != want_i || out.relational_modules != want_r {
            return Err(format!("modules {got:?} != {active:?}"));
        }
        let key = |x: &(Bucket, Pid, Value, Option<String>)| format!("{:?}", x);
        let mut routed = out.buckets.iter().map(|(b, c)| (b, c.property, c.value.clone(), c.module.clone())).collect::<Vec<_>>();
        let mut want = Vec::new();
        for (p, vs) in &e.claims {
            for cv in vs {
                let (b, m) = naive_route(&schema, expect_cat.as_deref(), &active, *p, &cv.value);
                let b = match b {
                    "core" => Bucket::Core,
                    "intrinsic" => Bucket::Intrinsic,
                    "relational" => Bucket::Relational,
                    _ => Bucket::Unclaimed,
                };
                want.push((b, *p, cv.value.clone(), m));
            }
        }
        routed.sort_by_key(key);
        want.sort_by_key(key);
        if routed != want {
            return Err(format!("routing differs for {e:?}"));
        }
    }
    Ok(())
}
