use std::collections::BTreeMap;

use kgroute::cleaning::{clean_entity, clean_records, clean_shards, curation_score, CoreIdSet, Decision, Tier};
use kgroute::ids::{Pid, Qid, HUMAN, INSTANCE_OF};
use kgroute::ingest::{write_shard, ClaimValue, EntityRecord, Value};
use kgroute::synth::{cleaning_corpus, reference_rules, CleaningPlan};
use proptest::prelude::*;

#[test]
fn planted_plan_is_recovered_exactly() {
    let plan = CleaningPlan::default();
    assert_eq!(plan.bulk(), 300);
    assert_eq!(plan.protected(), 40);
    let (records, planted) = cleaning_corpus(&plan, 42);
    let rules = reference_rules();
    let (verdicts, stats) = clean_records(&records, &rules);
    for ((id, v), p) in verdicts.iter().zip(&planted) {
        assert_eq!(*id, p.id);
        assert_eq!((v.decision, v.tier, v.protected), (p.decision, p.tier, p.protected), "{id}");
    }
    assert_eq!(stats.total, 1000);
    assert_eq!(stats.core as usize, plan.expected_core());
    assert_eq!(stats.non_core as usize, plan.expected_non_core());
    assert_eq!(stats.structural as usize, plan.expected_structural());
    assert_eq!(stats.signature as usize, plan.expected_signature());
    assert_eq!(stats.ratio_net as usize, plan.ratio_net);
    assert_eq!(stats.protected as usize, plan.protected());
}

#[test]
fn all_core_corpus_keeps_everything() {
    let plan = CleaningPlan {
        total: 200,
        infrastructure: 0,
        bulk_types: 0,
        bulk_types_protected: 0,
        signatures: 0,
        signatures_protected: 0,
        ratio_net: 0,
        ratio_notable: 0,
    };
    let (records, _) = cleaning_corpus(&plan, 1);
    let (_, stats) = clean_records(&records, &reference_rules());
    assert_eq!(stats.core, 200);
}

/// Independent re-summation over the weight table.
fn resum(e: &EntityRecord) -> u32 {
    let rules = reference_rules();
    let human = e.claims.get(&INSTANCE_OF).into_iter().flatten().any(|c| c.value == Value::Entity { id: HUMAN });
    let mut total = 0;
    for p in e.claims.keys() {
        total += match (rules.curation_weights.get(p), rules.people_curation_weights.get(p)) {
            (Some(w), _) => *w,
            (None, Some(w)) if human => *w,
            _ => 0,
        };
    }
    total
}

#[test]
fn curation_score_equals_resummation() {
    let (records, _) = cleaning_corpus(&CleaningPlan::default(), 9);
    let rules = reference_rules();
    for r in &records {
        assert_eq!(curation_score(r, &rules), resum(r));
    }
}

#[test]
fn sharded_cleaning_matches_in_memory() {
    let (records, _) = cleaning_corpus(&CleaningPlan::default(), 3);
    let dir = tempfile::tempdir().unwrap();
    let shards: Vec<_> = records
        .chunks(250)
        .enumerate()
        .map(|(i, c)| {
            let p = dir.path().join(format!("part-{i}.jsonl.zst"));
            write_shard(&p, c).unwrap();
            p
        })
        .collect();
    let rules = reference_rules();
    let (core, stats) = clean_shards(&shards, &rules).unwrap();
    let (verdicts, mem) = clean_records(&records, &rules);
    assert_eq!(stats.core, mem.core);
    assert_eq!(stats.by_rule, mem.by_rule);
    let want = CoreIdSet::from_ids(verdicts.iter().filter(|(_, v)| v.decision == Decision::Core).map(|(id, _)| *id));
    assert_eq!(core, want);
    let path = dir.path().join("core.ids");
    core.write(&path).unwrap();
    assert_eq!(CoreIdSet::read(&path).unwrap(), core);
}

#[test]
fn rule_order_inside_a_tier_does_not_change_verdicts() {
    let (records, _) = cleaning_corpus(&CleaningPlan::default(), 4);
    let rules = reference_rules();
    let mut reversed = rules.clone();
    reversed.source_signatures.reverse();
    for r in &records {
        assert_eq!(clean_entity(r, &rules), clean_entity(r, &reversed));
    }
}

#[test]
fn rules_with_weighted_marker_are_rejected() {
    let mut rules = reference_rules();
    rules.curation_weights.insert(Pid(1566), 2);
    assert!(rules.validate().is_err());
    let mut rules = reference_rules();
    rules.bulk_ratio_threshold = 0.0;
    assert!(rules.validate().is_err());
}

fn weighted() -> Vec<Pid> {
    let r = reference_rules();
    let mut v: Vec<Pid> = r.weighted_properties().collect();
    v.sort();
    v.dedup();
    v
}

fn any_prop() -> impl Strategy<Value = Pid> {
    prop_oneof![
        prop::sample::select(weighted()),
        prop::sample::select(reference_rules().bulk_marker_properties.into_iter().collect::<Vec<_>>()),
        prop::sample::select(vec![Pid(571), Pid(1705), Pid(577), Pid(1476)]),
    ]
}

fn any_type() -> impl Strategy<Value = Qid> {
    prop::sample::select(vec![Qid(5), Qid(515), Qid(13442814), Qid(523), Qid(4167836), Qid(11424)])
}

fn entity(types: Vec<Qid>, props: Vec<Pid>) -> EntityRecord {
    let mut e = EntityRecord::new(Qid(1));
    for t in types {
        e = e.with_claim(INSTANCE_OF, ClaimValue::new(t));
    }
    for p in props {
        e = e.with_claim(p, ClaimValue::new(Value::String { value: "x".into() }));
    }
    e
}

proptest! {
    /// Adding weighted properties never lowers the score and never turns a
    /// core verdict into non-core.
    #[test]
    fn curation_protection_is_monotonic(
        types in prop::collection::vec(any_type(), 0..3),
        props in prop::collection::vec(any_prop(), 0..8),
        extra in prop::collection::vec(prop::sample::select(weighted()), 1..4),
    ) {
        let rules = reference_rules();
        let before = entity(types.clone(), props.clone());
        let mut all = props.clone();
        all.extend(extra);
        let after = entity(types, all);
        let (vb, va) = (clean_entity(&before, &rules), clean_entity(&after, &rules));
        prop_assert!(va.curation_score >= vb.curation_score);
        if vb.decision == Decision::Core {
            prop_assert_eq!(va.decision, Decision::Core);
        }
        if vb.protected {
            prop_assert!(va.protected);
        }
    }

    #[test]
    fn tier_counts_partition_input(seed in 0u64..1000) {
        let plan = CleaningPlan { total: 300, bulk_types: 60, bulk_types_protected: 10, signatures: 40, signatures_protected: 5, ratio_net: 20, ratio_notable: 10, infrastructure: 5 };
        let (records, _) = cleaning_corpus(&plan, seed);
        let (_, s) = clean_records(&records, &reference_rules());
        prop_assert_eq!(s.structural + s.signature + s.ratio_net + s.default_core, s.total);
        prop_assert_eq!(s.core + s.non_core, s.total);
        let tiers: BTreeMap<&str, u64> = [("s", s.structural), ("g", s.signature), ("r", s.ratio_net)].into();
        prop_assert_eq!(tiers.values().sum::<u64>(), s.non_core);
    }
}

#[test]
fn ratio_net_boundary() {
    let rules = reference_rules();
    let mut e = EntityRecord::new(Qid(1)).with_claim(INSTANCE_OF, ClaimValue::new(Qid(515)));
    for p in [Pid(1566), Pid(698), Pid(818), Pid(932), Pid(5875)] {
        e = e.with_claim(p, ClaimValue::new(Value::String { value: "m".into() }));
    }
    e = e.with_claim(Pid(571), ClaimValue::new(Value::String { value: "x".into() }));
    // 5 of 7
    assert_eq!(clean_entity(&e, &rules).tier, Tier::RatioNet);
    e = e.with_claim(Pid(577), ClaimValue::new(Value::String { value: "x".into() }));
    // 5 of 8 is below 0.70
    assert_eq!(clean_entity(&e, &rules).tier, Tier::DefaultCore);
}
