#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kgroute::ingest::write_shard;
use kgroute::schema::write_schema;
use kgroute::synth::{refinement_fixture, RefinementPlan};
use serde_json::Value;

pub fn kgroute(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgroute")).args(args).output().unwrap()
}

pub fn ok(args: &[&str]) -> Value {
    let out = kgroute(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    serde_json::from_str(stdout.lines().last().unwrap_or("null")).unwrap()
}

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub struct Inputs {
    _dir: tempfile::TempDir,
    pub root: PathBuf,
}

impl Inputs {
    pub fn p(&self, name: &str) -> String {
        self.root.join(name).to_string_lossy().into_owned()
    }
}

pub fn inputs(seed: u64) -> Inputs {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    let f = refinement_fixture(&RefinementPlan::default(), seed);
    fs::create_dir(root.join("shards")).unwrap();
    for (i, chunk) in f.records.chunks(400).enumerate() {
        write_shard(root.join(format!("shards/part-{i}.jsonl.zst")), chunk).unwrap();
    }
    write_schema(&f.schema, root.join("schema")).unwrap();
    let tsv: String = f.labels.iter().map(|(id, l)| format!("{id}\t{l}\n")).collect();
    fs::write(root.join("labels.tsv"), tsv).unwrap();
    fs::write(root.join("oracle.jsonl"), &f.script).unwrap();
    Inputs { _dir: dir, root }
}
