//! Graph files (nodes, edges, stubs) and entity profiles.

mod graph;
mod profile;

pub use graph::{
    collect_edges, export_graph, raw_value, sha256_file, Edge, ExportManifest, ExportOptions, FileEntry,
    DEFAULT_QUALIFIER_COLUMNS, MANIFEST_FILE, MULTI_VALUE_SEPARATOR,
};
pub use profile::{export_profiles, mean_type_labels, profile, write_profiles, EntityProfile, ProfileConfig};
