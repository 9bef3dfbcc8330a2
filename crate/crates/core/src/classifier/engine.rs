use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::render::{render_sentence, render_value};
use crate::ids::{Ident, Pid, Qid, INSTANCE_OF, SUBCLASS_OF};
use crate::ingest::{resolve_label, EntityRecord, LabelLookup, Value, DEFAULT_LANGUAGE_CHAIN};
use crate::schema::{ModuleKind, SchemaConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bucket {
    Core,
    Intrinsic,
    Relational,
    Unclaimed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoutedQualifier {
    pub property: Pid,
    pub property_label: String,
    pub value: Value,
    pub value_label: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoutedClaim {
    pub property: Pid,
    pub property_label: String,
    pub value: Value,
    /// Display form of the value: the resolved label for entity refs.
    pub value_label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub module: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub qualifiers: Vec<RoutedQualifier>,
    pub sentence: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Buckets {
    pub core: Vec<RoutedClaim>,
    pub intrinsic: Vec<RoutedClaim>,
    pub relational: Vec<RoutedClaim>,
    pub unclaimed: Vec<RoutedClaim>,
}

impl Buckets {
    pub fn get(&self, b: Bucket) -> &[RoutedClaim] {
        match b {
            Bucket::Core => &self.core,
            Bucket::Intrinsic => &self.intrinsic,
            Bucket::Relational => &self.relational,
            Bucket::Unclaimed => &self.unclaimed,
        }
    }

    fn get_mut(&mut self, b: Bucket) -> &mut Vec<RoutedClaim> {
        match b {
            Bucket::Core => &mut self.core,
            Bucket::Intrinsic => &mut self.intrinsic,
            Bucket::Relational => &mut self.relational,
            Bucket::Unclaimed => &mut self.unclaimed,
        }
    }

    pub fn len(&self) -> usize {
        self.core.len() + self.intrinsic.len() + self.relational.len() + self.unclaimed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (Bucket, &RoutedClaim)> {
        [Bucket::Core, Bucket::Intrinsic, Bucket::Relational, Bucket::Unclaimed]
            .into_iter()
            .flat_map(move |b| self.get(b).iter().map(move |c| (b, c)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedRecord {
    pub id: Qid,
    pub label: Option<String>,
    pub description: Option<String>,
    pub category: Option<String>,
    pub intrinsic_modules: Vec<String>,
    pub relational_modules: Vec<String>,
    pub buckets: Buckets,
    pub label_misses: u32,
    pub shard: u32,
}

impl ClassifiedRecord {
    pub fn sentences(&self) -> impl Iterator<Item = &str> {
        self.buckets.iter().map(|(_, c)| c.sentence.as_str())
    }

    pub fn modules(&self) -> impl Iterator<Item = &str> {
        self.intrinsic_modules
            .iter()
            .chain(&self.relational_modules)
            .map(String::as_str)
    }

    /// Values of instance-of and subclass-of, whatever bucket they landed in.
    pub fn type_values(&self) -> impl Iterator<Item = Qid> + '_ {
        self.buckets
            .iter()
            .filter(|(_, c)| c.property == INSTANCE_OF || c.property == SUBCLASS_OF)
            .filter_map(|(_, c)| c.value.entity())
    }
}

#[derive(Debug)]
struct CompiledIndicator {
    property: Option<Pid>,
    /// Empty with `presence == false` means every listed value was malformed,
    /// so the indicator can never fire.
    values: HashSet<Qid>,
    presence: bool,
}

#[derive(Debug)]
struct CompiledModule {
    name: String,
    kind: ModuleKind,
    indicators: Vec<CompiledIndicator>,
    value_props: HashSet<Pid>,
}

#[derive(Debug)]
struct CompiledCategory {
    id: String,
    core: HashSet<Pid>,
    modules: Vec<CompiledModule>,
}

/// A schema compiled to numeric ids for fast per-entity evaluation.
///
/// Malformed ids in the schema are ignored here; the validator reports them.
#[derive(Debug)]
pub struct Classifier {
    gates: HashMap<Qid, usize>,
    categories: Vec<CompiledCategory>,
}

fn pids<'a>(ids: impl IntoIterator<Item = &'a String>) -> HashSet<Pid> {
    ids.into_iter().filter_map(|s| s.parse().ok()).collect()
}

impl Classifier {
    pub fn new(schema: &SchemaConfig) -> Self {
        let mut gates = HashMap::new();
        let mut categories = Vec::with_capacity(schema.categories.len());
        for (i, c) in schema.categories.iter().enumerate() {
            for g in &c.gate_values {
                if let Ok(q) = g.parse::<Qid>() {
                    gates.entry(q).or_insert(i);
                }
            }
            let modules = c
                .modules
                .iter()
                .map(|m| CompiledModule {
                    name: m.name.clone(),
                    kind: m.kind,
                    indicators: m
                        .indicators
                        .iter()
                        .map(|ind| CompiledIndicator {
                            property: ind.property.parse().ok(),
                            values: ind.values.iter().filter_map(|v| v.parse().ok()).collect(),
                            presence: ind.is_presence(),
                        })
                        .collect(),
                    value_props: pids(&m.value_props),
                })
                .collect();
            categories.push(CompiledCategory { id: c.id.clone(), core: pids(&c.core_properties), modules });
        }
        Classifier { gates, categories }
    }

    /// Index of the first category (priority order) whose gates intersect
    /// the entity's instance-of and subclass-of values.
    pub fn match_category_index(&self, e: &EntityRecord) -> Option<usize> {
        e.type_values().filter_map(|t| self.gates.get(&t).copied()).min()
    }

    pub fn match_category(&self, e: &EntityRecord) -> Option<&str> {
        self.match_category_index(e).map(|i| self.categories[i].id.as_str())
    }

    pub fn category_id(&self, index: usize) -> &str {
        &self.categories[index].id
    }

    /// Module indices of category `cat` that fire on `e`, in declaration
    /// order.
    pub fn match_module_indices(&self, e: &EntityRecord, cat: usize) -> Vec<usize> {
        self.categories[cat]
            .modules
            .iter()
            .enumerate()
            .filter(|(_, m)| m.indicators.iter().any(|ind| fires(ind, e)))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn match_modules(&self, e: &EntityRecord, cat: usize) -> Vec<&str> {
        self.match_module_indices(e, cat)
            .into_iter()
            .map(|i| self.categories[cat].modules[i].name.as_str())
            .collect()
    }

    /// Bucket and owning module for one claim value. Core wins over
    /// intrinsic, intrinsic over relational; relational only takes entity
    /// refs. Ties within a kind go to the first module in declaration order.
    pub fn route(&self, cat: Option<usize>, active: &[usize], p: Pid, v: &Value) -> (Bucket, Option<&str>) {
        let Some(cat) = cat else {
            return (Bucket::Unclaimed, None);
        };
        let c = &self.categories[cat];
        if c.core.contains(&p) {
            return (Bucket::Core, None);
        }
        let owner = |kind| {
            active
                .iter()
                .map(|&i| &c.modules[i])
                .find(|m| m.kind == kind && m.value_props.contains(&p))
        };
        if let Some(m) = owner(ModuleKind::Intrinsic) {
            return (Bucket::Intrinsic, Some(&m.name));
        }
        if v.entity().is_some() {
            if let Some(m) = owner(ModuleKind::Relational) {
                return (Bucket::Relational, Some(&m.name));
            }
        }
        (Bucket::Unclaimed, None)
    }

    /// Classify one entity: category, modules, routed claims and sentences.
    pub fn classify(&self, e: &EntityRecord, labels: &dyn LabelLookup) -> ClassifiedRecord {
        let id = e.item().unwrap_or(Qid(0));
        let cat = self.match_category_index(e);
        let active = cat.map(|c| self.match_module_indices(e, c)).unwrap_or_default();
        let mut misses = 0u32;
        let mut lookup = |ident: Ident| match labels.label(ident) {
            Some(l) => l,
            None => {
                misses += 1;
                ident.to_string()
            }
        };

        let own_label = resolve_label(&e.labels, &DEFAULT_LANGUAGE_CHAIN).map(str::to_string);
        let subject = match &own_label {
            Some(l) => l.clone(),
            None => lookup(Ident::Item(id)),
        };

        let mut buckets = Buckets::default();
        for (&p, values) in &e.claims {
            let p_label = lookup(Ident::Property(p));
            for claim in values {
                let (bucket, module) = self.route(cat, &active, p, &claim.value);
                let value_label = render_value(&claim.value, &mut lookup);
                let mut qualifiers = Vec::new();
                for (q, qvalues) in &claim.qualifiers {
                    let q_label = lookup(Ident::Property(*q));
                    for qv in qvalues {
                        qualifiers.push(RoutedQualifier {
                            property: *q,
                            property_label: q_label.clone(),
                            value: qv.clone(),
                            value_label: render_value(qv, &mut lookup),
                        });
                    }
                }
                let mut routed = RoutedClaim {
                    property: p,
                    property_label: p_label.clone(),
                    value: claim.value.clone(),
                    value_label,
                    module: module.map(str::to_string),
                    qualifiers,
                    sentence: String::new(),
                };
                routed.sentence = render_sentence(&routed, &subject);
                buckets.get_mut(bucket).push(routed);
            }
        }

        let (mut intrinsic, mut relational) = (Vec::new(), Vec::new());
        if let Some(c) = cat {
            for i in &active {
                let m = &self.categories[c].modules[*i];
                match m.kind {
                    ModuleKind::Intrinsic => intrinsic.push(m.name.clone()),
                    ModuleKind::Relational => relational.push(m.name.clone()),
                }
            }
        }

        ClassifiedRecord {
            id,
            label: own_label.or_else(|| labels.label(Ident::Item(id))),
            description: resolve_label(&e.descriptions, &DEFAULT_LANGUAGE_CHAIN).map(str::to_string),
            category: cat.map(|c| self.categories[c].id.clone()),
            intrinsic_modules: intrinsic,
            relational_modules: relational,
            buckets,
            label_misses: misses,
            shard: 0,
        }
    }
}

fn fires(ind: &CompiledIndicator, e: &EntityRecord) -> bool {
    let Some(p) = ind.property else {
        return false;
    };
    let Some(values) = e.claims.get(&p) else {
        return false;
    };
    if ind.presence {
        !values.is_empty()
    } else {
        values.iter().any(|c| c.value.entity().is_some_and(|q| ind.values.contains(&q)))
    }
}
