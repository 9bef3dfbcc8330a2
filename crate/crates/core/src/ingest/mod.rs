//! Reading entity dumps and resolving labels.

mod labels;
mod record;
mod sample;
mod shard;

pub use labels::{build_label_store, read_sidecar, LabelLookup, LabelStore, MemoryLabels, NoLabels};
pub use record::{resolve_label, to_dump_json, ClaimValue, Datatype, EntityRecord, Value, DEFAULT_LANGUAGE_CHAIN};
pub use sample::{sample_instances, SampleInstance, SampleResult};
pub use shard::{list_shards, read_shard, stream_shard, write_shard, write_shard_lines, ShardReader, ShardStats};
