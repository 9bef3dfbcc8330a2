use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ModuleKind, SchemaConfig};
use crate::ids::{is_pid, is_qid, Ident};
use crate::ingest::LabelLookup;

/// Where an id sits in the schema, which fixes the expected prefix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdRole {
    Gate,
    CoreProperty,
    IndicatorProperty,
    IndicatorValue,
    ValueProperty,
}

impl IdRole {
    fn expects_item(self) -> bool {
        matches!(self, IdRole::Gate | IdRole::IndicatorValue)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    /// A gate value appears in no value-based indicator of its category.
    GateNotSynced { category: String, gate: String },
    /// The same gate value is claimed by two categories.
    GateConflict { gate: String, first: String, second: String },
    MalformedId { category: String, role: IdRole, id: String },
    MissingAnnotation { id: String, file: Option<String>, line: Option<usize> },
    LabelMismatch { id: String, annotated: String, canonical: String, file: String, line: usize },
    DuplicateCategory { category: String },
    DuplicateModule { category: String, module: String },
    EmptyGates { category: String },
    EmptyIndicators { category: String, module: String },
    EmptyValueProps { category: String, module: String },
}

impl Violation {
    pub fn class(&self) -> &'static str {
        match self {
            Violation::GateNotSynced { .. } => "sync",
            Violation::GateConflict { .. } => "exclusivity",
            Violation::MalformedId { .. } => "id_format",
            Violation::MissingAnnotation { .. } | Violation::LabelMismatch { .. } => "annotation",
            _ => "structure",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::GateNotSynced { category, gate } => {
                write!(f, "({category}, {gate}): gate value has no value-based indicator in its category")
            }
            Violation::GateConflict { gate, first, second } => {
                write!(f, "{gate}: gate value claimed by both {first} and {second}")
            }
            Violation::MalformedId { category, role, id } => write!(f, "{category}: malformed id `{id}` ({role:?})"),
            Violation::MissingAnnotation { id, file, line } => match (file, line) {
                (Some(file), Some(line)) => write!(f, "{file}:{line}: {id} has no inline label"),
                _ => write!(f, "{id} has no inline label"),
            },
            Violation::LabelMismatch { id, annotated, canonical, file, line } => {
                write!(f, "{file}:{line}: {id} annotated `{annotated}`, store has `{canonical}`")
            }
            Violation::DuplicateCategory { category } => write!(f, "duplicate category {category}"),
            Violation::DuplicateModule { category, module } => write!(f, "{category}: duplicate module {module}"),
            Violation::EmptyGates { category } => write!(f, "{category}: no gate values"),
            Violation::EmptyIndicators { category, module } => write!(f, "{category}/{module}: no indicators"),
            Violation::EmptyValueProps { category, module } => write!(f, "{category}/{module}: no value properties"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "warning", rename_all = "snake_case")]
pub enum Warning {
    /// The label store has no entry for this id; existence is unverified.
    UnknownToStore { id: String },
    DuplicateIndicator { category: String, module: String, property: String },
    /// A property is a value property of both an intrinsic and a relational
    /// module of one category; routing sends it to the intrinsic bucket.
    KindOverlap { category: String, property: String, intrinsic: String, relational: String },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::UnknownToStore { id } => write!(f, "{id}: not present in label store"),
            Warning::DuplicateIndicator { category, module, property } => {
                write!(f, "{category}/{module}: more than one indicator on {property}")
            }
            Warning::KindOverlap { category, property, intrinsic, relational } => write!(
                f,
                "{category}: {property} is a value property of intrinsic {intrinsic} and relational {relational}"
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Warning>,
}

impl ValidationReport {
    /// A schema is valid when there are no violations; warnings do not count.
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// One JSON object per line, violations first.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for v in &self.violations {
            out.push_str(&serde_json::to_string(v).expect("violation serializes"));
            out.push('\n');
        }
        for w in &self.warnings {
            out.push_str(&serde_json::to_string(w).expect("warning serializes"));
            out.push('\n');
        }
        out
    }
}

/// Check every schema invariant and report all violations found.
pub fn validate_schema(schema: &SchemaConfig, labels: &dyn LabelLookup) -> ValidationReport {
    let mut report = ValidationReport::default();
    structure(schema, &mut report);
    id_formats(schema, &mut report);
    synchronization(schema, &mut report);
    exclusivity(schema, &mut report);
    annotations(schema, labels, &mut report);
    overlaps(schema, &mut report);
    report
}

fn structure(schema: &SchemaConfig, report: &mut ValidationReport) {
    let mut seen = HashSet::new();
    for c in &schema.categories {
        if !seen.insert(c.id.as_str()) {
            report.violations.push(Violation::DuplicateCategory { category: c.id.clone() });
        }
        if c.gate_values.is_empty() {
            report.violations.push(Violation::EmptyGates { category: c.id.clone() });
        }
        let mut names = HashSet::new();
        for m in &c.modules {
            if !names.insert(m.name.as_str()) {
                report.violations.push(Violation::DuplicateModule {
                    category: c.id.clone(),
                    module: m.name.clone(),
                });
            }
            if m.indicators.is_empty() {
                report.violations.push(Violation::EmptyIndicators {
                    category: c.id.clone(),
                    module: m.name.clone(),
                });
            }
            if m.value_props.is_empty() {
                report.violations.push(Violation::EmptyValueProps {
                    category: c.id.clone(),
                    module: m.name.clone(),
                });
            }
            let mut props = HashSet::new();
            for i in &m.indicators {
                if !props.insert(i.property.as_str()) {
                    report.warnings.push(Warning::DuplicateIndicator {
                        category: c.id.clone(),
                        module: m.name.clone(),
                        property: i.property.clone(),
                    });
                }
            }
        }
    }
}

fn id_formats(schema: &SchemaConfig, report: &mut ValidationReport) {
    for c in &schema.categories {
        let mut check = |role: IdRole, id: &str| {
            let ok = if role.expects_item() { is_qid(id) } else { is_pid(id) };
            if !ok {
                report.violations.push(Violation::MalformedId {
                    category: c.id.clone(),
                    role,
                    id: id.to_string(),
                });
            }
        };
        for g in &c.gate_values {
            check(IdRole::Gate, g);
        }
        for p in &c.core_properties {
            check(IdRole::CoreProperty, p);
        }
        for m in &c.modules {
            for i in &m.indicators {
                check(IdRole::IndicatorProperty, &i.property);
                for v in &i.values {
                    check(IdRole::IndicatorValue, v);
                }
            }
            for p in &m.value_props {
                check(IdRole::ValueProperty, p);
            }
        }
    }
}

fn synchronization(schema: &SchemaConfig, report: &mut ValidationReport) {
    for c in &schema.categories {
        let indicated: HashSet<&str> = c
            .modules
            .iter()
            .flat_map(|m| &m.indicators)
            .flat_map(|i| i.values.iter().map(String::as_str))
            .collect();
        for g in &c.gate_values {
            if !indicated.contains(g.as_str()) {
                report.violations.push(Violation::GateNotSynced {
                    category: c.id.clone(),
                    gate: g.clone(),
                });
            }
        }
    }
}

fn exclusivity(schema: &SchemaConfig, report: &mut ValidationReport) {
    let mut owner: HashMap<&str, &str> = HashMap::new();
    for c in &schema.categories {
        for g in &c.gate_values {
            match owner.get(g.as_str()) {
                Some(first) if *first != c.id => report.violations.push(Violation::GateConflict {
                    gate: g.clone(),
                    first: first.to_string(),
                    second: c.id.clone(),
                }),
                Some(_) => {}
                None => {
                    owner.insert(g, &c.id);
                }
            }
        }
    }
}

fn annotations(schema: &SchemaConfig, labels: &dyn LabelLookup, report: &mut ValidationReport) {
    let mut annotated: HashSet<&str> = HashSet::new();
    for a in &schema.annotations {
        if a.label.is_some() {
            annotated.insert(&a.id);
        }
    }
    annotated.extend(schema.extra_labels.keys().map(String::as_str));

    let mut unknown = HashSet::new();
    let mut canonical_cache: HashMap<&str, Option<String>> = HashMap::new();
    let canonical = |id: &str| -> Option<String> {
        Ident::parse(id).ok().and_then(|i| labels.label(i))
    };

    for a in &schema.annotations {
        let Some(label) = &a.label else {
            report.violations.push(Violation::MissingAnnotation {
                id: a.id.clone(),
                file: Some(a.file.clone()),
                line: Some(a.line),
            });
            continue;
        };
        if Ident::parse(&a.id).is_err() {
            // reported by the format check
            continue;
        }
        let canon = canonical_cache.entry(&a.id).or_insert_with(|| canonical(&a.id));
        match canon {
            Some(c) if c != label => report.violations.push(Violation::LabelMismatch {
                id: a.id.clone(),
                annotated: label.clone(),
                canonical: c.clone(),
                file: a.file.clone(),
                line: a.line,
            }),
            Some(_) => {}
            None => {
                if unknown.insert(a.id.clone()) {
                    report.warnings.push(Warning::UnknownToStore { id: a.id.clone() });
                }
            }
        }
    }
    for (id, label) in &schema.extra_labels {
        if let Some(Some(c)) = Ident::parse(id).ok().map(|i| labels.label(i)) {
            if &c != label {
                report.violations.push(Violation::LabelMismatch {
                    id: id.clone(),
                    annotated: label.clone(),
                    canonical: c,
                    file: String::new(),
                    line: 0,
                });
            }
        }
    }

    for id in schema.referenced_ids() {
        if !annotated.contains(id.as_str()) && !schema.annotations.iter().any(|a| a.id == id) {
            report.violations.push(Violation::MissingAnnotation { id, file: None, line: None });
        }
    }
}

fn overlaps(schema: &SchemaConfig, report: &mut ValidationReport) {
    for c in &schema.categories {
        let mut first_intrinsic: BTreeMap<&str, &str> = BTreeMap::new();
        for m in c.modules.iter().filter(|m| m.kind == ModuleKind::Intrinsic) {
            for p in &m.value_props {
                first_intrinsic.entry(p).or_insert(&m.name);
            }
        }
        let mut reported = HashSet::new();
        for m in c.modules.iter().filter(|m| m.kind == ModuleKind::Relational) {
            for p in &m.value_props {
                if let Some(owner) = first_intrinsic.get(p.as_str()) {
                    if reported.insert(p.as_str()) {
                        report.warnings.push(Warning::KindOverlap {
                            category: c.id.clone(),
                            property: p.clone(),
                            intrinsic: owner.to_string(),
                            relational: m.name.clone(),
                        });
                    }
                }
            }
        }
    }
}
