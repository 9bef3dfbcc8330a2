mod common;

use std::fs;
use std::path::Path;

use common::{fixtures, inputs, kgroute, ok};
use kgroute_cli::manifest::{digest, RunManifest};
use serde_json::Value;

#[test]
fn full_pipeline_records_consistent_manifest() {
    let i = inputs(11);
    let run = i.p("run");
    let store = i.p("labels.redb");
    let built = ok(&["labels-build", "--shards", &i.p("shards"), "--sidecar", &i.p("labels.tsv"), "--out", &store]);
    assert!(built["labels"].as_u64().unwrap() > 0);

    let cleaned = ok(&["clean", "--shards", &i.p("shards"), "--rules", &fixtures().join("cleaning_rules.yaml").to_string_lossy(), "--run", &run]);
    assert!(cleaned["core"].as_u64().unwrap() > 0, "{cleaned}");

    let classified = ok(&["classify", "--shards", &i.p("shards"), "--schema", &i.p("schema"), "--labels", &store, "--out", &run]);
    assert!(classified["r_c"].as_f64().unwrap() < 0.9);

    let refined = ok(&[
        "refine", "--run", &run, "--schema", &i.p("schema"), "--oracle", &i.p("oracle.jsonl"), "--auto-accept",
    ]);
    assert_eq!(refined["stop"], "converged", "{refined}");

    let analysis = ok(&["analyze", "--run", &run]);
    assert!(analysis.is_object());

    let out = i.p("export");
    let exported = ok(&["export", "--run", &run, "--out", &out, "--profiles"]);
    assert!(exported["nodes"].as_u64().unwrap() > 0);
    assert!(Path::new(&out).join("nodes").is_dir());

    let m = RunManifest::load(Path::new(&run)).unwrap();
    let stages: Vec<&str> = m.stages.iter().map(|s| s.stage.as_str()).collect();
    assert_eq!(stages, ["clean", "classify", "refine", "analyze", "export"]);
    for s in &m.stages {
        assert!(s.finished_at >= s.started_at);
        for name in &s.inputs {
            let rec = &m.inputs[name];
            assert_eq!(digest(&rec.path).unwrap(), rec.sha256, "{name}");
        }
    }
    assert!(m.schema_version.is_some());
    assert!(Path::new(&run).join("rounds/round-001.json").exists());
}

#[test]
fn changed_input_is_refused() {
    let i = inputs(12);
    let run = i.p("run");
    ok(&["classify", "--shards", &i.p("shards"), "--schema", &i.p("schema"), "--labels", &i.p("labels.tsv"), "--out", &run]);
    fs::write(i.root.join("labels.tsv"), "P31\tinstance of\n").unwrap();
    let out = kgroute(&["classify", "--shards", &i.p("shards"), "--schema", &i.p("schema"), "--labels", &i.p("labels.tsv"), "--out", &run]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"]["message"].as_str().unwrap().contains("digest mismatch"));
}

#[test]
fn opening_a_label_store_leaves_its_digest() {
    let i = inputs(13);
    let store = i.p("labels.redb");
    ok(&["labels-build", "--shards", &i.p("shards"), "--out", &store]);
    let before = digest(Path::new(&store)).unwrap();
    ok(&["validate", "--schema", &i.p("schema"), "--labels", &store]);
    assert_eq!(digest(Path::new(&store)).unwrap(), before);
}

#[test]
fn missing_argument_is_a_usage_error() {
    let out = kgroute(&["classify", "--shards", "x", "--labels", "y", "--out", "z"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "usage");
    assert!(err["error"]["message"].as_str().unwrap().contains("--schema"));
}

#[test]
fn help_exits_zero() {
    let out = kgroute(&["--help"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("classify"));
}

#[test]
fn validate_reports_and_exit_codes() {
    let out = kgroute(&["validate", "--schema", &fixtures().join("schema").to_string_lossy()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for line in String::from_utf8(out.stdout).unwrap().lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        assert!(v.get("warning").is_some(), "{line}");
    }

    let dir = tempfile::tempdir().unwrap();
    for f in fs::read_dir(fixtures().join("schema")).unwrap() {
        let f = f.unwrap();
        fs::copy(f.path(), dir.path().join(f.file_name())).unwrap();
    }
    let p = dir.path().join("organizations.yaml");
    let text = fs::read_to_string(&p).unwrap();
    fs::write(&p, text.replacen("- P571  # inception", "- P571x  # inception", 1)).unwrap();
    let out = kgroute(&["validate", "--schema", &dir.path().to_string_lossy()]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let first: Value = serde_json::from_str(stdout.lines().next().unwrap()).unwrap();
    assert!(first.to_string().contains("P571x"));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "invalid_schema");
}

#[test]
fn prompt_lists_categories() {
    let out = kgroute(&[
        "prompt",
        "--schema",
        &fixtures().join("schema").to_string_lossy(),
        "--display",
        &fixtures().join("display_names.json").to_string_lossy(),
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Person"), "{text}");
}
