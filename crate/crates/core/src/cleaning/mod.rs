//! Separating editorial entities from infrastructure and bulk imports.

mod cascade;
mod rules;
mod run;

pub use cascade::{bulk_marker_ratio, clean_entity, curation_score, CleaningVerdict, Decision, Tier, RATIO_RULE};
pub use rules::{CleaningRules, SourceSignature};
pub use run::{clean_records, clean_shards, CleaningStats, CoreIdSet};
