mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use common::{display_names, fixture_labels, fixture_schema, naive_edges};
use kgroute::classifier::classify_records;
use kgroute::cleaning::CoreIdSet;
use kgroute::export::{export_graph, export_profiles, mean_type_labels, sha256_file, ExportOptions, ProfileConfig};
use kgroute::ids::{Pid, Qid, HUMAN, INSTANCE_OF};
use kgroute::ingest::{ClaimValue, EntityRecord, MemoryLabels};
use kgroute::schema::{ModuleKind, SchemaConfig};
use kgroute::synth::{corpus_for_schema, random_schema, rng, Universe};

fn read_csv(path: &Path) -> Vec<BTreeMap<String, String>> {
    let mut text = String::new();
    if path.extension().is_some_and(|e| e == "zst") {
        zstd::Decoder::new(std::fs::File::open(path).unwrap()).unwrap().read_to_string(&mut text).unwrap();
    } else {
        text = std::fs::read_to_string(path).unwrap();
    }
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    rdr.records()
        .map(|r| headers.iter().zip(r.unwrap().iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect())
        .collect()
}

fn column(dir: &Path, sub: &str, col: &str) -> Vec<String> {
    let mut out = Vec::new();
    let d = dir.join(sub);
    if !d.exists() {
        return out;
    }
    for e in std::fs::read_dir(d).unwrap() {
        out.extend(read_csv(&e.unwrap().path()).into_iter().map(|r| r[col].clone()));
    }
    out
}

struct World {
    schema: SchemaConfig,
    records: Vec<EntityRecord>,
    labels: MemoryLabels,
    core: CoreIdSet,
}

fn fixture_world(n: usize, seed: u64) -> World {
    let schema = fixture_schema();
    let records = corpus_for_schema(&schema, n, seed);
    let mut labels = fixture_labels();
    labels.extend_from_records(&records);
    let core = CoreIdSet::from_ids(records.iter().filter_map(|r| r.item()));
    World { schema, records, labels, core }
}

fn opts() -> ExportOptions {
    ExportOptions { module_filter: None, qualifier_columns: 2, compress: false }
}

#[test]
fn every_edge_endpoint_has_a_node_or_stub() {
    let w = fixture_world(3000, 1);
    let (classified, _) = classify_records(&w.records, &w.schema, &w.labels);
    let dir = tempfile::tempdir().unwrap();
    let m = export_graph(&classified, &w.core, &w.schema, &w.labels, &opts(), dir.path()).unwrap();
    assert!(m.edges > 0 && m.stubs > 0);

    let nodes: BTreeSet<String> = column(dir.path(), "nodes", "id").into_iter().collect();
    let stubs: BTreeSet<String> = read_csv(&dir.path().join("stubs.csv")).into_iter().map(|r| r["id"].clone()).collect();
    assert!(nodes.is_disjoint(&stubs));
    for id in column(dir.path(), "edges", "target") {
        assert!(nodes.contains(&id) || stubs.contains(&id), "dangling target {id}");
    }
    for id in column(dir.path(), "edges", "source") {
        assert!(nodes.contains(&id), "dangling source {id}");
    }
    // stubs are exactly the non-core targets
    let want: BTreeSet<String> = column(dir.path(), "edges", "target")
        .into_iter()
        .filter(|t| !w.core.contains(t.parse().unwrap()))
        .collect();
    assert_eq!(stubs, want);
    assert_eq!(m.nodes as usize, nodes.len());
    assert_eq!(m.stubs as usize, stubs.len());
}

#[test]
fn edge_counts_match_recomputation() {
    let w = fixture_world(2000, 2);
    let (classified, _) = classify_records(&w.records, &w.schema, &w.labels);
    let dir = tempfile::tempdir().unwrap();
    let m = export_graph(&classified, &w.core, &w.schema, &w.labels, &opts(), dir.path()).unwrap();
    let core: BTreeSet<String> = w.core.iter().map(|q| q.to_string()).collect();
    let naive = naive_edges(&w.schema, &w.records, &core, None);
    let mut naive_total = 0;
    for (module, edges) in &naive {
        let rows = read_csv(&dir.path().join("edges").join(format!("{module}.csv")));
        let mut got: Vec<(String, String)> = rows.iter().map(|r| (r["source"].clone(), r["target"].clone())).collect();
        let mut want = edges.clone();
        got.sort();
        want.sort();
        assert_eq!(got, want, "{module}");
        naive_total += edges.len() as u64;
    }
    assert_eq!(m.edges, naive_total);
    // untyped corpus entities are core but have no node
    assert!(m.dropped_unclassified_targets > 0);
}

#[test]
fn module_filter_writes_only_selected_edges() {
    let w = fixture_world(3000, 3);
    let (classified, _) = classify_records(&w.records, &w.schema, &w.labels);
    let dir = tempfile::tempdir().unwrap();
    let filter: BTreeSet<String> = ["government", "legal", "politics"].iter().map(|s| s.to_string()).collect();
    let o = ExportOptions { module_filter: Some(filter.clone()), ..opts() };
    let m = export_graph(&classified, &w.core, &w.schema, &w.labels, &o, dir.path()).unwrap();
    let files: BTreeSet<String> =
        std::fs::read_dir(dir.path().join("edges")).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    assert_eq!(files, BTreeSet::from(["government.csv".into(), "legal.csv".into(), "politics.csv".into()]));
    let core: BTreeSet<String> = w.core.iter().map(|q| q.to_string()).collect();
    let naive = naive_edges(&w.schema, &w.records, &core, Some(&filter));
    assert_eq!(m.edges, naive.values().map(|v| v.len() as u64).sum::<u64>());
    // node files only carry edge endpoints
    let ends: BTreeSet<String> = naive.values().flatten().flat_map(|(s, t)| [s.clone(), t.clone()]).collect();
    for id in column(dir.path(), "nodes", "id") {
        assert!(ends.contains(&id));
    }
    assert!(export_graph(
        &classified,
        &w.core,
        &w.schema,
        &w.labels,
        &ExportOptions { module_filter: Some(["corporation".to_string()].into()), ..opts() },
        dir.path()
    )
    .is_err());
}

#[test]
fn corpus_without_relational_claims_has_empty_stub_file() {
    let u = Universe::default();
    let mut r = rng(4);
    let mut schema = random_schema(&mut r, &u);
    for c in &mut schema.categories {
        c.modules.retain(|m| m.kind == ModuleKind::Intrinsic);
    }
    let records = corpus_for_schema(&schema, 500, 4);
    let labels = u.label_store();
    let core = CoreIdSet::from_ids(records.iter().filter_map(|r| r.item()));
    let (classified, _) = classify_records(&records, &schema, &labels);
    let dir = tempfile::tempdir().unwrap();
    let m = export_graph(&classified, &core, &schema, &labels, &opts(), dir.path()).unwrap();
    assert_eq!((m.edges, m.stubs), (0, 0));
    assert_eq!(std::fs::read_to_string(dir.path().join("stubs.csv")).unwrap().trim(), "id,label");
    assert!(m.nodes > 0);
}

#[test]
fn compressed_export_has_same_rows_and_manifest_digests() {
    let w = fixture_world(1000, 5);
    let (classified, _) = classify_records(&w.records, &w.schema, &w.labels);
    let plain = tempfile::tempdir().unwrap();
    let packed = tempfile::tempdir().unwrap();
    let a = export_graph(&classified, &w.core, &w.schema, &w.labels, &opts(), plain.path()).unwrap();
    let b = export_graph(&classified, &w.core, &w.schema, &w.labels, &ExportOptions { compress: true, ..opts() }, packed.path()).unwrap();
    assert_eq!((a.nodes, a.edges, a.stubs), (b.nodes, b.edges, b.stubs));
    for f in &b.files {
        assert!(f.path.ends_with(".zst"));
        let p = packed.path().join(&f.path);
        assert_eq!(sha256_file(&p).unwrap(), f.sha256);
        assert_eq!(read_csv(&p).len() as u64, f.rows);
    }
}

#[test]
fn football_player_profile_carries_position() {
    let schema = fixture_schema();
    let mut labels = fixture_labels();
    let (player, team, position) = (Qid(91_500_001), Qid(91_500_002), Qid(91_500_003));
    labels.insert(player, "Some Player");
    labels.insert(team, "Some Team");
    labels.insert(position, "running back");
    let e = EntityRecord::new(player)
        .with_label("en", "Some Player")
        .with_claim(INSTANCE_OF, ClaimValue::new(HUMAN))
        .with_claim(Pid(54), ClaimValue::new(team))
        .with_claim(Pid(413), ClaimValue::new(position));
    let (classified, _) = classify_records(&[e], &schema, &labels);
    let cfg = ProfileConfig { display: display_names(), ..Default::default() };
    let p = export_profiles(&classified, &cfg);
    assert_eq!(p.len(), 1);
    assert_eq!(p[0].type_labels[0], "Person");
    assert!(p[0].type_labels.contains(&"sports".to_string()));
    assert!(p[0].type_labels.contains(&"running back".to_string()));
    let n = p[0].type_labels.len();
    assert_eq!(p[0].type_labels.iter().collect::<BTreeSet<_>>().len(), n);
}

#[test]
fn mean_type_labels_is_recomputed_average() {
    let w = fixture_world(1500, 6);
    let (classified, _) = classify_records(&w.records, &w.schema, &w.labels);
    let cfg = ProfileConfig { display: display_names(), ..Default::default() };
    let profiles = export_profiles(&classified, &cfg);
    assert_eq!(profiles.len(), classified.iter().filter(|r| r.category.is_some()).count());
    let mut total = 0usize;
    for r in classified.iter().filter(|r| r.category.is_some()) {
        // one category label, distinct module names, distinct playing positions
        let mut extra: BTreeSet<&str> = r.modules().collect();
        for (_, c) in r.buckets.iter() {
            if c.module.as_deref() == Some("sports") && c.property == Pid(413) {
                extra.insert(c.value_label.as_str());
            }
        }
        total += 1 + extra.len();
    }
    let want = total as f64 / profiles.len() as f64;
    assert!((mean_type_labels(&profiles) - want).abs() < 1e-9);
    assert_eq!(mean_type_labels(&[]), 0.0);
}
