use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifier::ClassifiedRecord;
use crate::error::{Error, Result};
use crate::ids::{Pid, Qid};

/// What goes into an entity profile besides category and module names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileConfig {
    /// Category id → display label. Missing entries fall back to the id.
    #[serde(default)]
    pub display: BTreeMap<String, String>,
    /// Module name → value properties whose value labels are added.
    #[serde(default)]
    pub discriminative: BTreeMap<String, Vec<Pid>>,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig {
            display: BTreeMap::new(),
            // playing position
            discriminative: [("sports".to_string(), vec![Pid(413)])].into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityProfile {
    pub id: Qid,
    pub label: Option<String>,
    /// Category label, module names, then discriminative value labels;
    /// duplicates removed.
    pub type_labels: Vec<String>,
}

pub fn profile(r: &ClassifiedRecord, cfg: &ProfileConfig) -> Option<EntityProfile> {
    let cat = r.category.as_ref()?;
    let mut labels = vec![cfg.display.get(cat).cloned().unwrap_or_else(|| cat.clone())];
    let mut push = |s: &str| {
        if !labels.iter().any(|l| l == s) {
            labels.push(s.to_string());
        }
    };
    for m in r.modules() {
        push(m);
    }
    for (_, c) in r.buckets.iter() {
        let Some(m) = c.module.as_deref() else { continue };
        if cfg.discriminative.get(m).is_some_and(|ps| ps.contains(&c.property)) {
            push(&c.value_label);
        }
    }
    Some(EntityProfile { id: r.id, label: r.label.clone(), type_labels: labels })
}

/// One profile per classified entity, in input order.
pub fn export_profiles(records: &[ClassifiedRecord], cfg: &ProfileConfig) -> Vec<EntityProfile> {
    records.iter().filter_map(|r| profile(r, cfg)).collect()
}

pub fn mean_type_labels(profiles: &[EntityProfile]) -> f64 {
    if profiles.is_empty() {
        return 0.0;
    }
    profiles.iter().map(|p| p.type_labels.len()).sum::<usize>() as f64 / profiles.len() as f64
}

pub fn write_profiles(profiles: &[EntityProfile], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::io::BufWriter::new(fs::File::create(path).map_err(Error::io(path))?);
    for p in profiles {
        writeln!(f, "{}", serde_json::to_string(p)?).map_err(Error::io(path))?;
    }
    f.flush().map_err(Error::io(path))
}
