//! Category assignment, module matching and four-bucket claim routing.

mod columnar;
mod engine;
mod render;
mod run;
mod stats;

pub use columnar::{arrow_schema, list_parts, part_name, read_classified, read_classified_dir, write_classified};
pub use engine::{Bucket, Buckets, ClassifiedRecord, Classifier, RoutedClaim, RoutedQualifier};
pub use render::{render_sentence, render_value};
pub use run::{classify_records, classify_shards, read_stats, write_stats, STATS_FILE};
pub use stats::{rates, BucketCounts, ClassStats};
