//! The declarative classification schema.
//!
//! A schema is an ordered list of categories. Each category carries a set of
//! gate values (entity-type ids that trigger membership), a list of shared
//! core properties, and named modules. A module is either intrinsic (its
//! value properties become node attributes) or relational (entity-valued
//! value properties become typed edges), and activates when any of its
//! indicators fires.
//!
//! Identifiers are kept as text in this model so that malformed ids can be
//! loaded and reported by [`validate_schema`]. The classifier compiles a
//! validated schema into a numeric form.

mod diff;
mod load;
mod prompt;
mod stats;
mod validate;
mod write;

use std::collections::BTreeMap;
use std::fmt;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};

pub use diff::{apply_diff, GateAddition, IndicatorEdit, ModuleEdit, SchemaDiff};
pub use load::{load_schema, parse_category, PRIORITY_FILE};
pub use prompt::generate_extraction_prompt;
pub use stats::{schema_stats, ModuleSpan, SpanReport};
pub use validate::{validate_schema, ValidationReport, Violation, Warning};
pub use write::{category_to_yaml, priority_to_yaml, write_schema};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModuleKind {
    Intrinsic,
    Relational,
}

impl fmt::Display for ModuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModuleKind::Intrinsic => "intrinsic",
            ModuleKind::Relational => "relational",
        })
    }
}

/// An activation condition `(property, values)`.
///
/// An empty value set means the indicator fires on mere presence of the
/// property; otherwise one of the entity's values must be in the set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Indicator {
    pub property: String,
    #[serde(default)]
    pub values: IndexSet<String>,
}

impl Indicator {
    pub fn presence(property: impl Into<String>) -> Self {
        Indicator { property: property.into(), values: IndexSet::new() }
    }

    pub fn values<I, S>(property: impl Into<String>, values: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Indicator {
            property: property.into(),
            values: values.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_presence(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleDef {
    pub name: String,
    pub kind: ModuleKind,
    pub indicators: Vec<Indicator>,
    pub value_props: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryDef {
    pub id: String,
    pub gate_values: IndexSet<String>,
    pub core_properties: Vec<String>,
    /// Declaration order is significant for routing ties.
    pub modules: Vec<ModuleDef>,
}

impl CategoryDef {
    pub fn module(&self, name: &str) -> Option<&ModuleDef> {
        self.modules.iter().find(|m| m.name == name)
    }

    pub fn module_mut(&mut self, name: &str) -> Option<&mut ModuleDef> {
        self.modules.iter_mut().find(|m| m.name == name)
    }

    /// True when `value` appears in some value-based indicator of this category.
    pub fn indicates(&self, value: &str) -> bool {
        self.modules
            .iter()
            .flat_map(|m| &m.indicators)
            .any(|i| i.values.contains(value))
    }
}

/// One inline `# label` annotation found in a schema file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub id: String,
    pub label: Option<String>,
    pub file: String,
    pub line: usize,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SchemaConfig {
    pub version: String,
    /// Priority order: the first category whose gates match wins.
    pub categories: Vec<CategoryDef>,
    /// Every id occurrence seen in the source files, with its inline label.
    #[serde(default)]
    pub annotations: Vec<Annotation>,
    /// Labels for ids introduced after loading (diffs), keyed by id.
    #[serde(default)]
    pub extra_labels: BTreeMap<String, String>,
}

impl SchemaConfig {
    pub fn category(&self, id: &str) -> Option<&CategoryDef> {
        self.categories.iter().find(|c| c.id == id)
    }

    pub fn category_mut(&mut self, id: &str) -> Option<&mut CategoryDef> {
        self.categories.iter_mut().find(|c| c.id == id)
    }

    /// Inline label for `id`: the first annotation carrying one, then labels
    /// attached by later edits.
    pub fn annotated_label(&self, id: &str) -> Option<&str> {
        self.annotations
            .iter()
            .find(|a| a.id == id && a.label.is_some())
            .and_then(|a| a.label.as_deref())
            .or_else(|| self.extra_labels.get(id).map(String::as_str))
    }

    /// id → label map over every annotated id.
    pub fn labels(&self) -> BTreeMap<String, String> {
        let mut out = self.extra_labels.clone();
        for a in self.annotations.iter().rev() {
            if let Some(l) = &a.label {
                out.insert(a.id.clone(), l.clone());
            }
        }
        out
    }

    /// Every id referenced by the schema structure, deduplicated, in
    /// declaration order.
    pub fn referenced_ids(&self) -> IndexSet<String> {
        let mut ids = IndexSet::new();
        for c in &self.categories {
            ids.extend(c.gate_values.iter().cloned());
            ids.extend(c.core_properties.iter().cloned());
            for m in &c.modules {
                for i in &m.indicators {
                    ids.insert(i.property.clone());
                    ids.extend(i.values.iter().cloned());
                }
                ids.extend(m.value_props.iter().cloned());
            }
        }
        ids
    }
}

/// Structural equality: categories, version and the id → label map.
/// Source line positions of annotations do not participate.
impl PartialEq for SchemaConfig {
    fn eq(&self, other: &Self) -> bool {
        self.version == other.version
            && self.categories == other.categories
            && self.labels() == other.labels()
    }
}
