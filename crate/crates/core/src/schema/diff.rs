use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Indicator, ModuleDef, SchemaConfig};
use crate::error::{Error, Result};
use crate::ids::{INSTANCE_OF, SUBCLASS_OF};

/// Add `type_id` to a category's gate set. When no indicator of the category
/// carries the value yet, it is synchronized into `module`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateAddition {
    pub category: String,
    pub type_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub module: Option<String>,
}

/// Add values to the first value-based indicator of `module` on `property`.
/// With no values, ensure a presence indicator on `property`. A matching
/// indicator is created when absent; presence indicators never gain values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndicatorEdit {
    pub category: String,
    pub module: String,
    pub property: String,
    #[serde(default)]
    pub values: Vec<String>,
}

/// Module restructuring. Splits and merges are expressed as deletions
/// followed by creations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ModuleEdit {
    Create { category: String, module: ModuleDef },
    Delete { category: String, module: String },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaDiff {
    #[serde(default)]
    pub module_edits: Vec<ModuleEdit>,
    #[serde(default)]
    pub added_gates: Vec<GateAddition>,
    #[serde(default)]
    pub indicator_edits: Vec<IndicatorEdit>,
    /// Inline labels for ids the diff introduces.
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
}

impl SchemaDiff {
    pub fn is_empty(&self) -> bool {
        self.module_edits.is_empty() && self.added_gates.is_empty() && self.indicator_edits.is_empty()
    }

    /// True when the diff only adds gates and indicator values.
    pub fn is_additive(&self) -> bool {
        self.module_edits.is_empty()
    }

    /// Number of individual schema edits carried.
    pub fn edit_count(&self) -> usize {
        self.module_edits.len() + self.added_gates.len() + self.indicator_edits.len()
    }

    pub fn extend(&mut self, other: SchemaDiff) {
        self.module_edits.extend(other.module_edits);
        self.added_gates.extend(other.added_gates);
        self.indicator_edits.extend(other.indicator_edits);
        self.labels.extend(other.labels);
    }
}

/// Apply `diff` to a copy of `schema`.
///
/// Module edits are applied first, then gate additions with synchronization,
/// then indicator edits. The result is not re-validated here.
pub fn apply_diff(schema: &SchemaConfig, diff: &SchemaDiff) -> Result<SchemaConfig> {
    let mut out = schema.clone();

    for edit in &diff.module_edits {
        match edit {
            ModuleEdit::Create { category, module } => {
                let c = category_mut(&mut out, category)?;
                if c.module(&module.name).is_some() {
                    return Err(Error::Diff(format!("module `{category}/{}` already exists", module.name)));
                }
                c.modules.push(module.clone());
            }
            ModuleEdit::Delete { category, module } => {
                let c = category_mut(&mut out, category)?;
                let before = c.modules.len();
                c.modules.retain(|m| &m.name != module);
                if c.modules.len() == before {
                    return Err(Error::Diff(format!("unknown module `{category}/{module}`")));
                }
            }
        }
    }

    for add in &diff.added_gates {
        let c = category_mut(&mut out, &add.category)?;
        if let Some(name) = &add.module {
            if c.module(name).is_none() {
                return Err(Error::Diff(format!("unknown module `{}/{name}`", add.category)));
            }
        }
        c.gate_values.insert(add.type_id.clone());
        if c.indicates(&add.type_id) {
            continue;
        }
        let Some(name) = &add.module else {
            // left for the validator to report as unsynchronized
            continue;
        };
        let module = c.module_mut(name).expect("checked above");
        sync_indicator(module).values.insert(add.type_id.clone());
    }

    for edit in &diff.indicator_edits {
        let c = category_mut(&mut out, &edit.category)?;
        let module = c
            .module_mut(&edit.module)
            .ok_or_else(|| Error::Diff(format!("unknown module `{}/{}`", edit.category, edit.module)))?;
        let presence = edit.values.is_empty();
        let found = module
            .indicators
            .iter()
            .position(|i| i.property == edit.property && i.is_presence() == presence);
        let idx = match found {
            Some(idx) => idx,
            None => {
                module.indicators.push(Indicator::presence(edit.property.clone()));
                module.indicators.len() - 1
            }
        };
        module.indicators[idx].values.extend(edit.values.iter().cloned());
    }

    for (id, label) in &diff.labels {
        if out.annotated_label(id).is_none() {
            out.extra_labels.insert(id.clone(), label.clone());
        }
    }
    Ok(out)
}

fn category_mut<'a>(schema: &'a mut SchemaConfig, id: &str) -> Result<&'a mut super::CategoryDef> {
    schema
        .category_mut(id)
        .ok_or_else(|| Error::Diff(format!("unknown category `{id}`")))
}

/// The indicator a new gate value is synchronized into: the first
/// value-based instance-of indicator, else the first value-based subclass-of
/// indicator, else a new value-based instance-of indicator.
fn sync_indicator(module: &mut ModuleDef) -> &mut Indicator {
    let p31 = INSTANCE_OF.to_string();
    let p279 = SUBCLASS_OF.to_string();
    let pick = |prop: &str| {
        module
            .indicators
            .iter()
            .position(|i| i.property == prop && !i.values.is_empty())
    };
    let idx = match pick(&p31).or_else(|| pick(&p279)) {
        Some(idx) => idx,
        None => {
            module.indicators.push(Indicator::presence(p31));
            module.indicators.len() - 1
        }
    };
    &mut module.indicators[idx]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{CategoryDef, ModuleKind};

    fn schema() -> SchemaConfig {
        SchemaConfig {
            version: "t".into(),
            categories: vec![CategoryDef {
                id: "organizations".into(),
                gate_values: ["Q6881511".to_string()].into_iter().collect(),
                core_properties: vec!["P571".into()],
                modules: vec![ModuleDef {
                    name: "corporation".into(),
                    kind: ModuleKind::Intrinsic,
                    indicators: vec![
                        Indicator::presence("P31"),
                        Indicator::values("P279", ["Q783794"]),
                        Indicator::values("P31", ["Q6881511"]),
                    ],
                    value_props: vec!["P1128".into()],
                }],
            }],
            ..Default::default()
        }
    }

    #[test]
    fn sync_prefers_value_based_instance_of() {
        let diff = SchemaDiff {
            added_gates: vec![GateAddition {
                category: "organizations".into(),
                type_id: "Q4830453".into(),
                module: Some("corporation".into()),
            }],
            ..Default::default()
        };
        let out = apply_diff(&schema(), &diff).unwrap();
        let c = out.category("organizations").unwrap();
        assert!(c.gate_values.contains("Q4830453"));
        let inds = &c.module("corporation").unwrap().indicators;
        assert!(inds[0].is_presence());
        assert!(!inds[1].values.contains("Q4830453"));
        assert!(inds[2].values.contains("Q4830453"));
    }

    #[test]
    fn sync_falls_back_to_subclass_then_creates() {
        let mut s = schema();
        s.categories[0].modules[0].indicators.remove(2);
        let add = |s: &SchemaConfig| {
            apply_diff(
                s,
                &SchemaDiff {
                    added_gates: vec![GateAddition {
                        category: "organizations".into(),
                        type_id: "Q1".into(),
                        module: Some("corporation".into()),
                    }],
                    ..Default::default()
                },
            )
            .unwrap()
        };
        let out = add(&s);
        assert!(out.categories[0].modules[0].indicators[1].values.contains("Q1"));

        s.categories[0].modules[0].indicators.remove(1);
        let out = add(&s);
        let inds = &out.categories[0].modules[0].indicators;
        assert_eq!(inds.len(), 2);
        assert_eq!(inds[1], Indicator::values("P31", ["Q1"]));
    }

    #[test]
    fn empty_diff_is_identity() {
        let s = schema();
        assert_eq!(apply_diff(&s, &SchemaDiff::default()).unwrap(), s);
    }

    #[test]
    fn unknown_references_are_rejected() {
        let s = schema();
        let bad_cat = SchemaDiff {
            added_gates: vec![GateAddition { category: "nowhere".into(), type_id: "Q1".into(), module: None }],
            ..Default::default()
        };
        assert!(matches!(apply_diff(&s, &bad_cat), Err(Error::Diff(m)) if m.contains("nowhere")));
        let bad_mod = SchemaDiff {
            indicator_edits: vec![IndicatorEdit {
                category: "organizations".into(),
                module: "ghost".into(),
                property: "P31".into(),
                values: vec!["Q2".into()],
            }],
            ..Default::default()
        };
        assert!(matches!(apply_diff(&s, &bad_mod), Err(Error::Diff(m)) if m.contains("ghost")));
    }

    #[test]
    fn original_is_untouched() {
        let s = schema();
        let diff = SchemaDiff {
            module_edits: vec![ModuleEdit::Delete { category: "organizations".into(), module: "corporation".into() }],
            ..Default::default()
        };
        let out = apply_diff(&s, &diff).unwrap();
        assert!(out.categories[0].modules.is_empty());
        assert_eq!(s.categories[0].modules.len(), 1);
    }

    #[test]
    fn indicator_edit_keeps_presence_semantics() {
        let d = SchemaDiff {
            indicator_edits: vec![
                IndicatorEdit {
                    category: "organizations".into(),
                    module: "corporation".into(),
                    property: "P31".into(),
                    values: vec!["Q4830453".into()],
                },
                IndicatorEdit {
                    category: "organizations".into(),
                    module: "corporation".into(),
                    property: "P452".into(),
                    values: vec![],
                },
            ],
            ..Default::default()
        };
        let out = apply_diff(&schema(), &d).unwrap();
        let m = out.categories[0].module("corporation").unwrap();
        assert!(m.indicators[0].is_presence());
        assert!(m.indicators[2].values.contains("Q4830453"));
        assert_eq!(m.indicators[3], Indicator::presence("P452"));
    }
}
