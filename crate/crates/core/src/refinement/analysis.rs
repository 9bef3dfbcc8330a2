use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::classifier::ClassifiedRecord;
use crate::ids::{Ident, Qid, INSTANCE_OF};
use crate::ingest::LabelLookup;
use crate::schema::SchemaConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryRow {
    pub category: String,
    pub entities: u64,
    pub with_modules: u64,
    pub no_module: u64,
    /// Share of the category's entities with at least one module.
    pub module_coverage: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeCount {
    pub type_id: Qid,
    pub label: Option<String>,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoModuleEntity {
    pub id: Qid,
    pub label: Option<String>,
    pub category: String,
    pub types: Vec<Qid>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub total: u64,
    pub classified: u64,
    /// One row per schema category, in priority order, zero rows included.
    pub categories: Vec<CategoryRow>,
    /// Instance-of frequency per category, most frequent first.
    pub type_frequency: BTreeMap<String, Vec<TypeCount>>,
    /// category → instance-of type → module → entity count.
    pub cross_tab: BTreeMap<String, BTreeMap<Qid, BTreeMap<String, u64>>>,
    pub no_module: Vec<NoModuleEntity>,
}

/// Per-category coverage, instance-of frequency tables, type × module
/// cross-tabulation and the list of entities without modules.
pub fn category_analysis(records: &[ClassifiedRecord], schema: &SchemaConfig, labels: &dyn LabelLookup) -> AnalysisReport {
    let mut rows: BTreeMap<&str, (u64, u64)> = schema.categories.iter().map(|c| (c.id.as_str(), (0, 0))).collect();
    let mut freq: BTreeMap<String, BTreeMap<Qid, u64>> = BTreeMap::new();
    let mut cross: BTreeMap<String, BTreeMap<Qid, BTreeMap<String, u64>>> = BTreeMap::new();
    let mut no_module = Vec::new();
    let mut classified = 0;
    for r in records {
        let Some(cat) = r.category.as_deref() else { continue };
        classified += 1;
        let row = rows.entry(cat).or_default();
        row.0 += 1;
        let has_modules = r.modules().next().is_some();
        if has_modules {
            row.1 += 1;
        }
        let p31: BTreeSet<Qid> = r
            .buckets
            .iter()
            .filter(|(_, c)| c.property == INSTANCE_OF)
            .filter_map(|(_, c)| c.value.entity())
            .collect();
        for t in &p31 {
            *freq.entry(cat.to_string()).or_default().entry(*t).or_default() += 1;
            let by_module = cross.entry(cat.to_string()).or_default().entry(*t).or_default();
            for m in r.modules() {
                *by_module.entry(m.to_string()).or_default() += 1;
            }
        }
        if !has_modules {
            no_module.push(NoModuleEntity {
                id: r.id,
                label: r.label.clone(),
                category: cat.to_string(),
                types: p31.into_iter().collect(),
            });
        }
    }
    no_module.sort_by_key(|e| e.id);

    let order: Vec<&str> = schema
        .categories
        .iter()
        .map(|c| c.id.as_str())
        .chain(rows.keys().copied().filter(|k| schema.category(k).is_none()))
        .collect();
    let categories = order
        .into_iter()
        .map(|c| {
            let (entities, with_modules) = rows[c];
            CategoryRow {
                category: c.to_string(),
                entities,
                with_modules,
                no_module: entities - with_modules,
                module_coverage: if entities == 0 { 0.0 } else { with_modules as f64 / entities as f64 },
            }
        })
        .collect();

    let type_frequency = freq
        .into_iter()
        .map(|(cat, counts)| {
            let mut v: Vec<TypeCount> = counts
                .into_iter()
                .map(|(t, count)| TypeCount { type_id: t, label: labels.label(Ident::Item(t)), count })
                .collect();
            v.sort_by(|a, b| b.count.cmp(&a.count).then(a.type_id.cmp(&b.type_id)));
            (cat, v)
        })
        .collect();

    AnalysisReport {
        total: records.len() as u64,
        classified,
        categories,
        type_frequency,
        cross_tab: cross,
        no_module,
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfusionCell {
    pub category: String,
    pub external: String,
    pub count: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub agree: u64,
    pub disagree: u64,
    /// Classified output has the entity but gave it no category.
    pub cannot_evaluate: u64,
    /// Externally labeled ids absent from the classified output.
    pub uncovered: u64,
    /// agree / (agree + disagree), 0 when nothing was comparable.
    pub agreement: f64,
    pub confusion: Vec<ConfusionCell>,
    /// Categories seen in the output but missing from the mapping.
    pub unmapped_categories: Vec<String>,
}

/// Compare schema categories against an external labeling. `mapping` lists
/// the external labels compatible with each category.
pub fn agreement_audit(
    records: &[ClassifiedRecord],
    external: &BTreeMap<Qid, String>,
    mapping: &BTreeMap<String, BTreeSet<String>>,
) -> AgreementReport {
    let by_id: std::collections::HashMap<Qid, &ClassifiedRecord> = records.iter().map(|r| (r.id, r)).collect();
    let mut report = AgreementReport::default();
    let mut cells: BTreeMap<(String, String), u64> = BTreeMap::new();
    let mut unmapped = BTreeSet::new();
    for (id, ext) in external {
        let Some(r) = by_id.get(id) else {
            report.uncovered += 1;
            continue;
        };
        let Some(cat) = &r.category else {
            report.cannot_evaluate += 1;
            continue;
        };
        *cells.entry((cat.clone(), ext.clone())).or_default() += 1;
        match mapping.get(cat) {
            Some(ok) if ok.contains(ext) => report.agree += 1,
            Some(_) => report.disagree += 1,
            None => {
                unmapped.insert(cat.clone());
                report.disagree += 1;
            }
        }
    }
    let compared = report.agree + report.disagree;
    report.agreement = if compared == 0 { 0.0 } else { report.agree as f64 / compared as f64 };
    report.confusion = cells
        .into_iter()
        .map(|((category, external), count)| ConfusionCell { category, external, count })
        .collect();
    report.unmapped_categories = unmapped.into_iter().collect();
    report
}
