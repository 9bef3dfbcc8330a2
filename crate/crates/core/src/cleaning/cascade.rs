use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::rules::CleaningRules;
use crate::ids::{HUMAN, INSTANCE_OF};
use crate::ingest::EntityRecord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Core,
    NonCore,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tier {
    Structural,
    Signature,
    RatioNet,
    DefaultCore,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningVerdict {
    pub decision: Decision,
    pub tier: Tier,
    /// Type id, signature name, or `bulk-marker-ratio`. On a protected core
    /// entity this names the bulk-import rule that was overridden.
    pub matched_rule: Option<String>,
    pub curation_score: u32,
    /// A bulk-import type or signature matched, but the curation score kept
    /// the entity.
    pub protected: bool,
}

pub const RATIO_RULE: &str = "bulk-marker-ratio";

/// Sum of curation weights over the properties present on `e`. People tiers
/// only count for instances of human; a property counts once regardless of
/// how many values it has.
pub fn curation_score(e: &EntityRecord, rules: &CleaningRules) -> u32 {
    let human = e.is_instance_of(HUMAN);
    let mut score = 0;
    for (p, values) in &e.claims {
        if values.is_empty() {
            continue;
        }
        if let Some(w) = rules.curation_weights.get(p) {
            score += w;
        } else if human {
            if let Some(w) = rules.people_curation_weights.get(p) {
                score += w;
            }
        }
    }
    score
}

/// Share of the entity's distinct properties that are bulk markers.
pub fn bulk_marker_ratio(e: &EntityRecord, rules: &CleaningRules) -> f64 {
    let distinct = e.claims.iter().filter(|(_, v)| !v.is_empty()).count();
    if distinct == 0 {
        return 0.0;
    }
    let markers = e
        .claims
        .iter()
        .filter(|(p, v)| !v.is_empty() && rules.bulk_marker_properties.contains(p))
        .count();
    markers as f64 / distinct as f64
}

/// Run the cleaning cascade on one entity.
///
/// Tiers are tried in order: structural type lists, source signatures, the
/// marker-ratio net, and finally the default. A curation score at or above
/// the threshold overrides bulk-import matches (types and signatures) but
/// never infrastructure matches. Within a tier the smallest matching rule is
/// reported, so rule order inside a tier is irrelevant.
pub fn clean_entity(e: &EntityRecord, rules: &CleaningRules) -> CleaningVerdict {
    let score = curation_score(e, rules);
    let notable = score >= rules.score_threshold;
    let verdict = |decision, tier, rule: Option<String>, protected| CleaningVerdict {
        decision,
        tier,
        matched_rule: rule,
        curation_score: score,
        protected,
    };

    let types: Vec<_> = e.entity_values(INSTANCE_OF).collect();
    if let Some(t) = types.iter().filter(|t| rules.infrastructure_types.contains(t)).min() {
        return verdict(Decision::NonCore, Tier::Structural, Some(t.to_string()), false);
    }

    let mut overridden: Option<String> = None;
    if let Some(t) = types.iter().filter(|t| rules.bulk_import_types.contains(t)).min() {
        if !notable {
            return verdict(Decision::NonCore, Tier::Structural, Some(t.to_string()), false);
        }
        overridden = Some(t.to_string());
    }

    let present: HashSet<_> = e
        .claims
        .iter()
        .filter(|(_, v)| !v.is_empty())
        .map(|(p, _)| *p)
        .collect();
    let signature = rules
        .source_signatures
        .iter()
        .filter(|s| s.properties.iter().all(|p| present.contains(p)))
        .map(|s| s.name.as_str())
        .min();
    if let Some(name) = signature {
        if !notable {
            return verdict(Decision::NonCore, Tier::Signature, Some(name.to_string()), false);
        }
        overridden.get_or_insert_with(|| name.to_string());
    }

    if !notable && bulk_marker_ratio(e, rules) >= rules.bulk_ratio_threshold {
        return verdict(Decision::NonCore, Tier::RatioNet, Some(RATIO_RULE.to_string()), false);
    }

    let protected = overridden.is_some();
    verdict(Decision::Core, Tier::DefaultCore, overridden, protected)
}
