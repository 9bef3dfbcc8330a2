use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::record::{resolve_label, DEFAULT_LANGUAGE_CHAIN};
use super::shard::ShardReader;
use crate::error::Result;
use crate::ids::Qid;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleInstance {
    pub id: Qid,
    pub label: Option<String>,
    pub description: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleResult {
    /// Total number of entities whose instance-of claims contain the type.
    pub count: u64,
    /// Up to `k` of them, in shard then line order.
    pub instances: Vec<SampleInstance>,
}

/// Scan shards for instances of `type_id`. An offline stand-in for a live
/// type query: counts, labels, descriptions and sample instances.
pub fn sample_instances(shards: &[PathBuf], type_id: Qid, k: usize) -> Result<SampleResult> {
    let k = k.max(1);
    let per_shard: Vec<Result<SampleResult>> = shards
        .par_iter()
        .map(|path| {
            let mut res = SampleResult::default();
            for r in ShardReader::open(path)? {
                let r = r?;
                let Some(id) = r.item() else { continue };
                if !r.is_instance_of(type_id) {
                    continue;
                }
                res.count += 1;
                if res.instances.len() < k {
                    res.instances.push(SampleInstance {
                        id,
                        label: resolve_label(&r.labels, &DEFAULT_LANGUAGE_CHAIN).map(str::to_string),
                        description: resolve_label(&r.descriptions, &DEFAULT_LANGUAGE_CHAIN).map(str::to_string),
                    });
                }
            }
            Ok(res)
        })
        .collect();
    let mut out = SampleResult::default();
    for r in per_shard {
        let r = r?;
        out.count += r.count;
        let room = k - out.instances.len();
        out.instances.extend(r.instances.into_iter().take(room));
    }
    Ok(out)
}
