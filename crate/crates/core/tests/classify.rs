mod common;

use std::collections::BTreeSet;

use common::{check_world, fixture_entity, fixture_labels, fixture_schema};
use kgroute::classifier::{classify_records, classify_shards, read_classified_dir, Bucket, Classifier};
use kgroute::ids::{Pid, Qid};
use kgroute::ingest::{write_shard, ClaimValue, EntityRecord, MemoryLabels, Value};
use kgroute::synth::{random_entity, random_schema, rng, Universe};
use proptest::prelude::*;

#[test]
fn apple_is_an_organization_with_one_intrinsic_and_eight_relational_modules() {
    let apple = fixture_entity("apple");
    let r = Classifier::new(&fixture_schema()).classify(&apple, &fixture_labels());
    assert_eq!(r.category.as_deref(), Some("organizations"));
    assert_eq!(r.intrinsic_modules, ["corporation"]);
    let relational: BTreeSet<&str> = r.relational_modules.iter().map(String::as_str).collect();
    assert_eq!(
        relational,
        BTreeSet::from(["affiliation", "finance", "location", "award", "technology", "legal", "international", "culture"])
    );
}

#[test]
fn apple_claims_follow_table_one() {
    let r = Classifier::new(&fixture_schema()).classify(&fixture_entity("apple"), &fixture_labels());
    let founders: Vec<(&str, Option<&str>)> = r
        .buckets
        .relational
        .iter()
        .filter(|c| c.property == Pid(112))
        .map(|c| (c.value_label.as_str(), c.module.as_deref()))
        .collect();
    assert_eq!(
        founders,
        [("Steve Wozniak", Some("affiliation")), ("Ronald Wayne", Some("affiliation")), ("Steve Jobs", Some("affiliation"))]
    );
    let employees = r.buckets.intrinsic.iter().find(|c| c.property == Pid(1128)).unwrap();
    assert_eq!(employees.module.as_deref(), Some("corporation"));
    // core, intrinsic and relational placements from the property table
    let bucket_of = |p: u32| {
        r.buckets
            .iter()
            .find(|(_, c)| c.property == Pid(p))
            .map(|(b, c)| (b, c.module.clone()))
            .unwrap()
    };
    assert_eq!(bucket_of(571), (Bucket::Core, None));
    assert_eq!(bucket_of(856), (Bucket::Core, None));
    assert_eq!(bucket_of(1056), (Bucket::Intrinsic, Some("corporation".into())));
    assert_eq!(bucket_of(355), (Bucket::Relational, Some("affiliation".into())));
    assert_eq!(bucket_of(169), (Bucket::Relational, Some("finance".into())));
    assert_eq!(bucket_of(414), (Bucket::Relational, Some("finance".into())));
    assert_eq!(bucket_of(740), (Bucket::Relational, Some("location".into())));
    // an external identifier is owned by no module
    assert_eq!(bucket_of(2002), (Bucket::Unclaimed, None));
    let beats = r.buckets.relational.iter().find(|c| c.property == Pid(355)).unwrap();
    assert_eq!(beats.value.entity(), Some(Qid(1961036)));
    assert_eq!(r.label_misses, 0);
}

#[test]
fn apple_sentences() {
    let r = Classifier::new(&fixture_schema()).classify(&fixture_entity("apple"), &fixture_labels());
    let sentences: Vec<&str> = r.sentences().collect();
    assert!(sentences.contains(&"Apple Inc.'s founded by is Steve Jobs."));
    assert!(sentences.contains(&"Apple Inc.'s inception is 1976-04-01."));
    assert!(sentences.contains(&"Apple Inc.'s employees is 164000 (point in time: 2023-09-30)."));
    assert!(sentences.contains(&"Apple Inc.'s total revenue is 383285000000 United States dollar."));
}

#[test]
fn walwyn_sentence_from_fixture() {
    let r = Classifier::new(&fixture_schema()).classify(&fixture_entity("walwyn"), &fixture_labels());
    assert_eq!(r.category.as_deref(), Some("people"));
    let s: Vec<&str> = r.sentences().collect();
    assert!(s.contains(&"James Humphrey Walwyn's occupation is military officer (military branch: Royal Navy)."));
}

#[test]
fn two_qualifiers_share_one_parenthetical() {
    let mut labels = fixture_labels();
    labels.insert(Qid(7), "Some Person");
    let e = EntityRecord::new(Qid(7)).with_claim(
        Pid(39),
        ClaimValue::new(Qid(30))
            .with_qualifier(Pid(580), Value::Time { value: "+1901-01-01T00:00:00Z".into() })
            .with_qualifier(Pid(582), Value::Time { value: "+1905-01-01T00:00:00Z".into() }),
    );
    let r = Classifier::new(&fixture_schema()).classify(&e, &labels);
    let s: Vec<&str> = r.sentences().collect();
    assert_eq!(s, ["Some Person's position held is United States of America (start time: 1901-01-01; end time: 1905-01-01)."]);
}

#[test]
fn missing_labels_fall_back_to_ids_and_are_counted() {
    let e = EntityRecord::new(Qid(424242)).with_claim(Pid(999999), ClaimValue::new(Qid(888888)));
    let r = Classifier::new(&fixture_schema()).classify(&e, &MemoryLabels::new());
    assert_eq!(r.sentences().collect::<Vec<_>>(), ["Q424242's P999999 is Q888888."]);
    assert_eq!(r.label_misses, 3);
}

#[test]
fn random_worlds_match_naive_evaluator() {
    for seed in 0..100 {
        check_world(seed, 100).unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn partition_and_equivalence_hold(seed in any::<u64>()) {
        check_world(seed, 40).map_err(TestCaseError::fail)?;
    }
}

#[test]
fn category_counts_sum_to_classified() {
    let u = Universe::default();
    let mut r = rng(11);
    let schema = random_schema(&mut r, &u);
    let records: Vec<EntityRecord> = (0..2000).map(|i| random_entity(&mut r, &u, Qid(i + 1))).collect();
    let (out, stats) = classify_records(&records, &schema, &u.label_store());
    assert_eq!(stats.per_category.values().sum::<u64>(), stats.classified);
    assert_eq!(out.iter().filter(|r| r.category.is_some()).count() as u64, stats.classified);
    assert_eq!(stats.claims, records.iter().map(|r| r.claim_count() as u64).sum::<u64>());
}

#[test]
fn sharded_run_is_deterministic() {
    let u = Universe::default();
    let mut r = rng(5);
    let schema = random_schema(&mut r, &u);
    let records: Vec<EntityRecord> = (0..900).map(|i| random_entity(&mut r, &u, Qid(i + 1))).collect();
    let dir = tempfile::tempdir().unwrap();
    let shards: Vec<_> = records
        .chunks(300)
        .enumerate()
        .map(|(i, chunk)| {
            let p = dir.path().join(format!("shard-{i}.jsonl.zst"));
            write_shard(&p, chunk).unwrap();
            p
        })
        .collect();
    let labels = u.label_store();
    let a = classify_shards(&shards, None, &schema, &labels, Some(&dir.path().join("a"))).unwrap();
    let b = classify_shards(&shards, None, &schema, &labels, Some(&dir.path().join("b"))).unwrap();
    assert_eq!(a, b);
    let ra = read_classified_dir(dir.path().join("a")).unwrap();
    let rb = read_classified_dir(dir.path().join("b")).unwrap();
    assert_eq!(ra, rb);
    assert_eq!(ra.len(), 900);
    let (mem, mem_stats) = classify_records(&records, &schema, &labels);
    assert_eq!(mem_stats.r_c, a.r_c);
    assert_eq!(mem_stats.r_m, a.r_m);
    let ids = |v: &[kgroute::classifier::ClassifiedRecord]| v.iter().map(|r| (r.id, r.category.clone())).collect::<Vec<_>>();
    assert_eq!(ids(&mem), ids(&ra));
}
