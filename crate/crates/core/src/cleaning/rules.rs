use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{Pid, Qid, INSTANCE_OF};

/// A known import source, fingerprinted by a property combination that its
/// entities all carry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSignature {
    pub name: String,
    pub properties: BTreeSet<Pid>,
}

fn default_score_threshold() -> u32 {
    3
}

fn default_ratio_threshold() -> f64 {
    0.70
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CleaningRules {
    #[serde(default)]
    pub infrastructure_types: BTreeSet<Qid>,
    #[serde(default)]
    pub bulk_import_types: BTreeSet<Qid>,
    #[serde(default)]
    pub source_signatures: Vec<SourceSignature>,
    /// General editorial signals, weight 1..=3.
    #[serde(default)]
    pub curation_weights: BTreeMap<Pid, u32>,
    /// Signals that only count for instances of human.
    #[serde(default)]
    pub people_curation_weights: BTreeMap<Pid, u32>,
    #[serde(default = "default_score_threshold")]
    pub score_threshold: u32,
    #[serde(default = "default_ratio_threshold")]
    pub bulk_ratio_threshold: f64,
    #[serde(default)]
    pub bulk_marker_properties: BTreeSet<Pid>,
}

impl Default for CleaningRules {
    fn default() -> Self {
        CleaningRules {
            infrastructure_types: BTreeSet::new(),
            bulk_import_types: BTreeSet::new(),
            source_signatures: Vec::new(),
            curation_weights: BTreeMap::new(),
            people_curation_weights: BTreeMap::new(),
            score_threshold: default_score_threshold(),
            bulk_ratio_threshold: default_ratio_threshold(),
            bulk_marker_properties: BTreeSet::new(),
        }
    }
}

impl CleaningRules {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(Error::io(path))?;
        let rules: CleaningRules = serde_yaml::from_str(&text).map_err(|e| Error::Parse {
            file: path.to_path_buf(),
            line: e.location().map(|l| l.line()),
            message: e.to_string(),
        })?;
        rules.validate()?;
        Ok(rules)
    }

    /// Check thresholds and weight tables.
    ///
    /// Weighted properties must not double as bulk markers, signature
    /// properties, or instance-of: adding a weighted property to an entity
    /// must never make it look more like a bulk import.
    pub fn validate(&self) -> Result<()> {
        if !(self.bulk_ratio_threshold > 0.0 && self.bulk_ratio_threshold <= 1.0) {
            return Err(Error::Rules(format!(
                "bulk_ratio_threshold {} outside (0, 1]",
                self.bulk_ratio_threshold
            )));
        }
        for (p, w) in self.curation_weights.iter().chain(&self.people_curation_weights) {
            if !(1..=3).contains(w) {
                return Err(Error::Rules(format!("weight {w} for {p} outside 1..=3")));
            }
        }
        for (p, w) in &self.people_curation_weights {
            if let Some(g) = self.curation_weights.get(p) {
                if g != w {
                    return Err(Error::Rules(format!("{p} weighted {g} (general) and {w} (people)")));
                }
            }
        }
        for p in self.weighted_properties() {
            if p == INSTANCE_OF {
                return Err(Error::Rules("instance of cannot carry a curation weight".into()));
            }
            if self.bulk_marker_properties.contains(&p) {
                return Err(Error::Rules(format!("{p} is both a curation signal and a bulk marker")));
            }
            if let Some(sig) = self.source_signatures.iter().find(|s| s.properties.contains(&p)) {
                return Err(Error::Rules(format!(
                    "{p} is both a curation signal and part of signature `{}`",
                    sig.name
                )));
            }
        }
        if let Some(sig) = self.source_signatures.iter().find(|s| s.properties.is_empty()) {
            return Err(Error::Rules(format!("signature `{}` has no properties", sig.name)));
        }
        Ok(())
    }

    pub fn weighted_properties(&self) -> impl Iterator<Item = Pid> + '_ {
        self.curation_weights
            .keys()
            .chain(self.people_curation_weights.keys())
            .copied()
    }
}
