mod common;

use common::{fixture_labels, fixture_schema, fixtures};
use kgroute::schema::{load_schema, validate_schema, SchemaConfig, Violation};
use kgroute::synth::rng;
use rand::seq::SliceRandom;
use rand::Rng;

fn caught(schema: &SchemaConfig, class: &str, id: &str) -> bool {
    let report = validate_schema(schema, &fixture_labels());
    report.violations.iter().any(|v| {
        v.class() == class
            && match v {
                Violation::GateNotSynced { gate, .. } | Violation::GateConflict { gate, .. } => gate == id,
                Violation::MalformedId { id: bad, .. } => bad == id,
                Violation::MissingAnnotation { id: a, .. } | Violation::LabelMismatch { id: a, .. } => a == id,
                _ => false,
            }
    })
}

#[test]
fn unsynchronized_gates_are_caught() {
    let base = fixture_schema();
    let mut r = rng(100);
    let mut hits = 0;
    for _ in 0..50 {
        let mut s = base.clone();
        let ci = r.gen_range(0..s.categories.len());
        let c = &mut s.categories[ci];
        let gate = c.gate_values[r.gen_range(0..c.gate_values.len())].clone();
        for m in &mut c.modules {
            for i in &mut m.indicators {
                i.values.retain(|v| *v != gate);
            }
        }
        hits += caught(&s, "sync", &gate) as usize;
    }
    assert_eq!(hits, 50);
}

#[test]
fn shared_gates_are_caught() {
    let base = fixture_schema();
    let mut r = rng(200);
    let mut hits = 0;
    for _ in 0..50 {
        let mut s = base.clone();
        let (a, b) = loop {
            let a = r.gen_range(0..s.categories.len());
            let b = r.gen_range(0..s.categories.len());
            if a != b {
                break (a, b);
            }
        };
        let gates = &s.categories[a].gate_values;
        let gate = gates[r.gen_range(0..gates.len())].clone();
        let target = &mut s.categories[b];
        target.gate_values.insert(gate.clone());
        // keep the copy synchronized so only exclusivity is at stake
        if let Some(ind) = target.modules.iter_mut().flat_map(|m| &mut m.indicators).find(|i| !i.values.is_empty()) {
            ind.values.insert(gate.clone());
        }
        hits += caught(&s, "exclusivity", &gate) as usize;
    }
    assert_eq!(hits, 50);
}

#[test]
fn malformed_ids_are_caught() {
    let base = fixture_schema();
    let mut r = rng(300);
    let shapes = ["Q12a", "q42", "Q", "P-5", "P31 ", "Q0x1F", "5", "QP7", "P", "Q1.5"];
    let mut hits = 0;
    for n in 0..50 {
        let mut s = base.clone();
        let bad = format!("{}{}", shapes[n % shapes.len()], if n >= shapes.len() { "x" } else { "" });
        let ci = r.gen_range(0..s.categories.len());
        let c = &mut s.categories[ci];
        match n % 4 {
            0 => {
                let i = r.gen_range(0..c.gate_values.len());
                c.gate_values.shift_remove_index(i);
                c.gate_values.insert(bad.clone());
            }
            1 => c.core_properties.push(bad.clone()),
            2 => {
                let m = c.modules.choose_mut(&mut r).unwrap();
                m.value_props.push(bad.clone());
            }
            _ => {
                let m = c.modules.choose_mut(&mut r).unwrap();
                m.indicators[0].property = bad.clone();
            }
        }
        hits += caught(&s, "id_format", &bad) as usize;
    }
    assert_eq!(hits, 50);
}

#[test]
fn stripped_or_wrong_annotations_are_caught() {
    let dir = tempfile::tempdir().unwrap();
    for f in std::fs::read_dir(fixtures().join("schema")).unwrap() {
        let f = f.unwrap();
        std::fs::copy(f.path(), dir.path().join(f.file_name())).unwrap();
    }
    let path = dir.path().join("organizations.yaml");
    let text = std::fs::read_to_string(&path).unwrap();
    let edited = text
        .replacen("- P571  # inception", "- P571", 1)
        .replacen("# headquarters location", "# head office", 1);
    assert_ne!(edited, text);
    std::fs::write(&path, edited).unwrap();
    let s = load_schema(dir.path()).unwrap();
    assert!(caught(&s, "annotation", "P571"));
    assert!(caught(&s, "annotation", "P159"));
    let report = validate_schema(&s, &fixture_labels());
    assert!(report.violations.iter().any(|v| matches!(v, Violation::LabelMismatch { id, .. } if id == "P159")));
}

#[test]
fn clean_fixture_and_report_lines() {
    let report = validate_schema(&fixture_schema(), &fixture_labels());
    assert!(report.is_valid());
    let mut s = fixture_schema();
    s.categories[0].core_properties.push("P1x".into());
    let report = validate_schema(&s, &fixture_labels());
    let lines = report.to_json_lines();
    assert_eq!(lines.lines().count(), report.violations.len() + report.warnings.len());
    assert!(lines.contains("P1x"));
}
