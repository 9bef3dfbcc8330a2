use serde::{Deserialize, Serialize};

use crate::classifier::{rates, ClassStats};
use crate::ids::Qid;

/// Entities the schema fails on, and the rates derived from them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FailureSets {
    pub total: u64,
    /// No gate matched.
    pub unclassified: Vec<Qid>,
    /// Classified, but no module fired.
    pub no_module: Vec<Qid>,
    pub r_c: f64,
    pub r_m: f64,
}

impl FailureSets {
    pub fn classified(&self) -> u64 {
        self.total - self.unclassified.len() as u64
    }

    pub fn meets(&self, theta_c: f64, theta_m: f64) -> bool {
        self.r_c >= theta_c && self.r_m >= theta_m
    }
}

pub fn compute_failures(stats: &ClassStats) -> FailureSets {
    let (r_c, r_m) = rates(stats.total, stats.unclassified_ids.len() as u64, stats.no_module_ids.len() as u64);
    FailureSets {
        total: stats.total,
        unclassified: stats.unclassified_ids.clone(),
        no_module: stats.no_module_ids.clone(),
        r_c,
        r_m,
    }
}
