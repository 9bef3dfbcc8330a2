use std::collections::{BTreeMap, BTreeSet};

use kgroute::classifier::classify_records;
use kgroute::ids::{Pid, Qid, INSTANCE_OF};
use kgroute::ingest::{ClaimValue, EntityRecord, MemoryLabels};
use kgroute::refinement::{
    agreement_audit, apply_reviewed, candidate_types, refine, Evidence, MemoryCorpus, OracleDecision, OracleResponse, RefineConfig,
    RequestKind, ReviewJournal, ReviewState, RoundStatus, RunStore, ScriptedOracle, StopReason, Verdict,
};
use kgroute::schema::{apply_diff, validate_schema};
use kgroute::synth::{
    corpus_for_schema, random_additive_diff, random_schema, refinement_fixture, refinement_seed_schema, rng, RefinementPlan, Universe,
};
use rand::Rng;

fn auto() -> RefineConfig {
    RefineConfig { auto_accept: true, ..Default::default() }
}

#[test]
fn fixture_converges_within_three_rounds() {
    let f = refinement_fixture(&RefinementPlan::default(), 7);
    let corpus = MemoryCorpus { records: f.records.clone() };
    let mut oracle = ScriptedOracle::from_str(&f.script).unwrap();
    let out = refine(&corpus, &f.schema, &f.labels, &mut oracle, &auto(), None).unwrap();

    let first = &out.rounds[0].before;
    assert!((first.r_c - 0.60).abs() < 1e-9, "{}", first.r_c);
    assert!((first.r_m - 0.85).abs() < 1e-9, "{}", first.r_m);
    assert_eq!(out.stop, StopReason::Converged);
    let oracle_rounds = out.rounds.iter().filter(|r| r.status == RoundStatus::Applied).count();
    assert!(oracle_rounds <= 3, "{oracle_rounds} rounds");
    assert!(out.stats.r_c >= 0.9 && out.stats.r_m >= 0.9, "{} {}", out.stats.r_c, out.stats.r_m);
    assert!(validate_schema(&out.schema, &f.labels).is_valid());
}

#[test]
fn run_store_records_every_round() {
    let f = refinement_fixture(&RefinementPlan::default(), 8);
    let dir = tempfile::tempdir().unwrap();
    let store = RunStore::new(dir.path());
    let mut oracle = ScriptedOracle::from_str(&f.script).unwrap();
    let out = refine(&MemoryCorpus { records: f.records }, &f.schema, &f.labels, &mut oracle, &auto(), Some(&store)).unwrap();
    let saved = store.read_rounds().unwrap();
    assert_eq!(saved, out.rounds);
    assert_eq!(store.current_schema().unwrap(), out.schema);
    assert_eq!(kgroute::refinement::replay(&f.schema, &saved).unwrap(), out.schema);
}

#[test]
fn declining_oracle_stops_without_edits() {
    let f = refinement_fixture(&RefinementPlan::default(), 9);
    let mut oracle = ScriptedOracle::default();
    let out = refine(&MemoryCorpus { records: f.records }, &f.schema, &f.labels, &mut oracle, &auto(), None).unwrap();
    assert_eq!(out.stop, StopReason::NoAcceptedDecisions);
    assert_eq!(out.schema, f.schema);
    assert!(out.rounds[0].decisions.iter().all(|d| d.is_decline()));
}

#[test]
fn additive_diffs_never_lose_coverage() {
    let u = Universe::default();
    for seed in 0..100 {
        let mut r = rng(seed);
        let schema = random_schema(&mut r, &u);
        let diff = random_additive_diff(&mut r, &schema, &u);
        assert!(diff.is_additive());
        let next = apply_diff(&schema, &diff).unwrap();
        let labels = u.label_store();
        let rep = validate_schema(&next, &labels);
        assert!(rep.is_valid(), "seed {seed}: {}", rep.to_json_lines());
        let records = corpus_for_schema(&schema, 300, seed);
        let (a, sa) = classify_records(&records, &schema, &labels);
        let (b, sb) = classify_records(&records, &next, &labels);
        assert!(sb.r_c >= sa.r_c, "seed {seed}");
        assert!(sb.classified >= sa.classified);
        for (x, y) in a.iter().zip(&b) {
            if x.category.is_some() {
                assert!(y.category.is_some(), "seed {seed}: {} lost its category", x.id);
            }
            if x.category == y.category {
                let before: BTreeSet<&str> = x.modules().collect();
                let after: BTreeSet<&str> = y.modules().collect();
                assert!(before.is_subset(&after), "seed {seed}: {} lost modules", x.id);
            }
        }
    }
}

#[test]
fn fabricated_identifiers_are_always_rejected() {
    let schema = refinement_seed_schema();
    let f = refinement_fixture(&RefinementPlan::default(), 1);
    let mut r = rng(77);
    let mut rejected = 0;
    for i in 0..100 {
        let fake_q = format!("Q{}", r.gen_range(800_000_000u64..900_000_000));
        let fake_p = format!("P{}", r.gen_range(800_000..900_000));
        let (kind, subject, verdict) = match i % 3 {
            0 => (RequestKind::Category, fake_q.clone(), Verdict::Assign { category: "places".into(), module: Some("nature".into()) }),
            1 => (
                RequestKind::Module,
                "people".into(),
                Verdict::Indicator { category: None, module: "career".into(), property: fake_p, values: vec![] },
            ),
            _ => (
                RequestKind::Module,
                "people".into(),
                Verdict::Indicator { category: None, module: "career".into(), property: "P106".into(), values: vec![fake_q] },
            ),
        };
        let d = OracleDecision::intake(
            format!("r0-{i}"),
            0,
            kind,
            &subject,
            Ok(OracleResponse { verdict, rationale: String::new() }),
            Evidence::default(),
            &schema,
            &f.labels,
        );
        if !d.is_actionable() && d.issues.iter().any(|s| s.starts_with("invalid-identifier")) {
            rejected += 1;
        }
    }
    assert_eq!(rejected, 100);
}

#[test]
fn candidate_lists_rank_frequency_and_hubs() {
    let schema = refinement_seed_schema();
    let (t1, t2, t3) = (Qid(96_000_001), Qid(96_000_002), Qid(96_000_003));
    let mut records = Vec::new();
    let mut id = 10u64;
    let mut push = |r: &mut Vec<EntityRecord>, t: Qid, n: usize| {
        let mut ids = Vec::new();
        for _ in 0..n {
            id += 1;
            r.push(EntityRecord::new(Qid(id)).with_claim(INSTANCE_OF, ClaimValue::new(t)));
            ids.push(Qid(id));
        }
        ids
    };
    push(&mut records, t1, 40);
    let hubs = push(&mut records, t2, 5);
    push(&mut records, t3, 12);
    for i in 0..25 {
        records.push(
            EntityRecord::new(Qid(50_000 + i))
                .with_claim(INSTANCE_OF, ClaimValue::new(Qid(783794)))
                .with_claim(Pid(112), ClaimValue::new(hubs[i as usize % hubs.len()])),
        );
    }
    let labels = MemoryLabels::new();
    let (classified, _) = classify_records(&records, &schema, &labels);
    let c = candidate_types(&classified, &labels, 1, 1);
    assert_eq!(c.iter().map(|c| c.type_id).collect::<Vec<_>>(), [t1, t2]);
    assert_eq!(c[0].unclassified_count, 40);
    assert_eq!(c[1].inbound_refs, 25);
    assert_eq!(c[1].unclassified_count, 5);
    assert!(c[0].samples.len() <= kgroute::refinement::MAX_SAMPLES);

    let wide = candidate_types(&classified, &labels, 3, 3);
    assert_eq!(wide.iter().map(|c| c.type_id).collect::<Vec<_>>(), [t1, t3, t2]);
}

#[test]
fn reviewed_decisions_apply_only_when_accepted() {
    let f = refinement_fixture(&RefinementPlan::default(), 3);
    let dir = tempfile::tempdir().unwrap();
    let store = RunStore::new(dir.path());
    let corpus = MemoryCorpus { records: f.records.clone() };
    let mut oracle = ScriptedOracle::from_str(&f.script).unwrap();
    let cfg = RefineConfig::default();
    let out = refine(&corpus, &f.schema, &f.labels, &mut oracle, &cfg, Some(&store)).unwrap();
    assert_eq!(out.stop, StopReason::AwaitingReview);
    assert_eq!(out.schema, f.schema);

    let actionable: Vec<_> = out.rounds[0].decisions.iter().filter(|d| d.is_actionable()).collect();
    assert_eq!(actionable.len(), 3);
    let mut journal = ReviewJournal::open(store.journal_path()).unwrap();
    journal.set(&actionable[0].id, ReviewState::Accepted, None).unwrap();
    journal.set(&actionable[1].id, ReviewState::Accepted, Some("ok".into())).unwrap();
    journal.set(&actionable[2].id, ReviewState::Rejected, None).unwrap();
    // Repeating a review is a no-op.
    let (_, changed) = journal.set(&actionable[2].id, ReviewState::Rejected, None).unwrap();
    assert!(!changed);

    let (round, _) = apply_reviewed(&store, &corpus, &f.labels).unwrap();
    assert_eq!(round.status, RoundStatus::Applied);
    assert_eq!(round.diff.edit_count(), 2);
    let after = round.after.unwrap();
    assert!(after.r_c > round.before.r_c);
    assert_ne!(store.current_schema().unwrap(), f.schema);
    // Nothing left to apply.
    assert!(apply_reviewed(&store, &corpus, &f.labels).is_err());
}

#[test]
fn agreement_audit_counts_and_cross_tab() {
    let f = refinement_fixture(&RefinementPlan::default(), 5);
    let (classified, _) = classify_records(&f.records, &f.schema, &f.labels);
    let mapping: BTreeMap<String, BTreeSet<String>> = [
        ("people", ["person"]),
        ("places", ["location"]),
        ("organizations", ["organization"]),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.iter().map(|s| s.to_string()).collect()))
    .collect();
    let truth = |c: &str| mapping[c].iter().next().unwrap().clone();

    let mut external = BTreeMap::new();
    for (n, r) in classified.iter().filter(|r| r.category.is_some()).take(100).enumerate() {
        let label = if n < 93 { truth(r.category.as_deref().unwrap()) } else { "misc".to_string() };
        external.insert(r.id, label);
    }
    let unclassified = classified.iter().find(|r| r.category.is_none()).unwrap().id;
    external.insert(unclassified, "misc".into());
    external.insert(Qid(1), "person".into());

    let report = agreement_audit(&classified, &external, &mapping);
    assert_eq!((report.agree, report.disagree), (93, 7));
    assert!((report.agreement - 0.93).abs() < 1e-12);
    assert_eq!(report.cannot_evaluate, 1);
    assert_eq!(report.uncovered, 1);

    // brute-force cross tabulation
    let mut brute: BTreeMap<(String, String), u64> = BTreeMap::new();
    for (id, ext) in &external {
        if let Some(cat) = classified.iter().find(|r| r.id == *id).and_then(|r| r.category.clone()) {
            *brute.entry((cat, ext.clone())).or_default() += 1;
        }
    }
    let got: BTreeMap<(String, String), u64> =
        report.confusion.iter().map(|c| ((c.category.clone(), c.external.clone()), c.count)).collect();
    assert_eq!(got, brute);
}
