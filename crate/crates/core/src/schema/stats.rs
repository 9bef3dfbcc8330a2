use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ModuleKind, SchemaConfig};

/// One module grouping: all definitions sharing a name and kind.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleSpan {
    pub name: String,
    pub kind: ModuleKind,
    /// Categories defining the module, in schema priority order.
    pub categories: Vec<String>,
    pub span: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanReport {
    pub modules: Vec<ModuleSpan>,
    /// Distinct intrinsic module names.
    pub intrinsic_modules: usize,
    /// Distinct relational module names.
    pub relational_modules: usize,
    pub intrinsic_definitions: usize,
    pub relational_definitions: usize,
    /// Bipartite adjacency as (category, module) pairs.
    pub edges: Vec<(String, String)>,
}

impl SpanReport {
    pub fn span_of(&self, name: &str) -> Option<usize> {
        self.modules.iter().find(|m| m.name == name).map(|m| m.span)
    }

    /// Relational groupings whose span is at least `min`.
    pub fn relational_spanning(&self, min: usize) -> impl Iterator<Item = &ModuleSpan> {
        self.modules
            .iter()
            .filter(move |m| m.kind == ModuleKind::Relational && m.span >= min)
    }

    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for m in &self.modules {
            out.push_str(&serde_json::to_string(m).expect("span serializes"));
            out.push('\n');
        }
        out.push_str(
            &serde_json::json!({
                "intrinsic_modules": self.intrinsic_modules,
                "relational_modules": self.relational_modules,
                "intrinsic_definitions": self.intrinsic_definitions,
                "relational_definitions": self.relational_definitions,
            })
            .to_string(),
        );
        out.push('\n');
        out
    }
}

pub fn schema_stats(schema: &SchemaConfig) -> SpanReport {
    let mut groups: BTreeMap<(String, ModuleKind), Vec<String>> = BTreeMap::new();
    let mut report = SpanReport::default();
    for c in &schema.categories {
        for m in &c.modules {
            match m.kind {
                ModuleKind::Intrinsic => report.intrinsic_definitions += 1,
                ModuleKind::Relational => report.relational_definitions += 1,
            }
            let cats = groups.entry((m.name.clone(), m.kind)).or_default();
            if !cats.contains(&c.id) {
                cats.push(c.id.clone());
            }
            report.edges.push((c.id.clone(), m.name.clone()));
        }
    }
    for ((name, kind), categories) in groups {
        match kind {
            ModuleKind::Intrinsic => report.intrinsic_modules += 1,
            ModuleKind::Relational => report.relational_modules += 1,
        }
        report.modules.push(ModuleSpan { span: categories.len(), name, kind, categories });
    }
    report
        .modules
        .sort_by(|a, b| b.span.cmp(&a.span).then_with(|| a.name.cmp(&b.name)));
    report
}
