use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifier::{ClassifiedRecord, RoutedClaim};
use crate::cleaning::CoreIdSet;
use crate::error::{Error, Result};
use crate::ids::{Ident, Pid, Qid};
use crate::ingest::{LabelLookup, Value};
use crate::schema::{ModuleKind, SchemaConfig};

/// Separator for multi-valued cells.
pub const MULTI_VALUE_SEPARATOR: &str = "|";
pub const DEFAULT_QUALIFIER_COLUMNS: usize = 3;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug)]
pub struct ExportOptions {
    /// Restrict edges to these relational modules; node files then hold only
    /// edge endpoints.
    pub module_filter: Option<BTreeSet<String>>,
    pub qualifier_columns: usize,
    /// Write `.csv.zst` instead of `.csv`.
    pub compress: bool,
}

impl Default for ExportOptions {
    fn default() -> Self {
        ExportOptions { module_filter: None, qualifier_columns: DEFAULT_QUALIFIER_COLUMNS, compress: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the export directory.
    pub path: String,
    pub rows: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportManifest {
    pub nodes: u64,
    pub edges: u64,
    pub stubs: u64,
    /// Edges whose target is a core entity the schema left unclassified.
    pub dropped_unclassified_targets: u64,
    /// Stubs written with their raw id because the label store missed.
    pub stub_label_misses: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub module_filter: Option<Vec<String>>,
    /// Qualifier properties given their own column, per module.
    pub qualifier_columns: BTreeMap<String, Vec<Pid>>,
    pub files: Vec<FileEntry>,
}

/// One edge before layout.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge<'a> {
    pub source: Qid,
    pub target: Qid,
    pub module: &'a str,
    pub claim: &'a RoutedClaim,
}

/// Text form of a value for export cells: entity ids stay ids.
pub fn raw_value(v: &Value) -> String {
    match v {
        Value::Entity { id } => id.to_string(),
        Value::String { value } | Value::Time { value } => value.clone(),
        Value::Quantity { amount, unit } => match unit {
            Some(u) => format!("{amount} {u}"),
            None => amount.clone(),
        },
        Value::Coordinate { latitude, longitude } => format!("{latitude},{longitude}"),
        Value::Other { raw } => raw.clone(),
    }
}

/// Relational edges of classified entities, grouped by module, with the
/// targets that are core but unclassified dropped.
pub fn collect_edges<'a>(
    records: &'a [ClassifiedRecord],
    core: &CoreIdSet,
    filter: Option<&BTreeSet<String>>,
) -> (BTreeMap<&'a str, Vec<Edge<'a>>>, u64) {
    let classified: HashSet<Qid> = records.iter().filter(|r| r.category.is_some()).map(|r| r.id).collect();
    let mut edges: BTreeMap<&str, Vec<Edge>> = BTreeMap::new();
    let mut dropped = 0;
    for r in records.iter().filter(|r| r.category.is_some()) {
        for c in &r.buckets.relational {
            let (Some(target), Some(module)) = (c.value.entity(), c.module.as_deref()) else {
                continue;
            };
            if filter.is_some_and(|f| !f.contains(module)) {
                continue;
            }
            if core.contains(target) && !classified.contains(&target) {
                dropped += 1;
                continue;
            }
            edges.entry(module).or_default().push(Edge { source: r.id, target, module, claim: c });
        }
    }
    for v in edges.values_mut() {
        v.sort_by_key(|a| (a.source, a.claim.property, a.target));
    }
    (edges, dropped)
}

struct Sink {
    rel: String,
    path: PathBuf,
    writer: csv::Writer<Box<dyn Write>>,
    rows: u64,
}

impl Sink {
    fn create(dir: &Path, rel: String, compress: bool) -> Result<Self> {
        let rel = if compress { format!("{rel}.zst") } else { rel };
        let path = dir.join(&rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(Error::io(parent))?;
        }
        let file = BufWriter::new(File::create(&path).map_err(Error::io(&path))?);
        let inner: Box<dyn Write> = if compress {
            Box::new(zstd::Encoder::new(file, 0).map_err(Error::io(&path))?.auto_finish())
        } else {
            Box::new(file)
        };
        Ok(Sink { rel, path, writer: csv::Writer::from_writer(inner), rows: 0 })
    }

    fn header<I: IntoIterator<Item = S>, S: AsRef<[u8]>>(&mut self, cells: I) -> Result<()> {
        self.writer.write_record(cells).map_err(|e| csv_err(&self.path, e))
    }

    fn row<I: IntoIterator<Item = S>, S: AsRef<[u8]>>(&mut self, cells: I) -> Result<()> {
        self.rows += 1;
        self.header(cells)
    }

    fn finish(self) -> Result<FileEntry> {
        let Sink { rel, path, writer, rows } = self;
        let mut inner = writer.into_inner().map_err(|e| Error::io(&path)(e.into_error()))?;
        inner.flush().map_err(Error::io(&path))?;
        drop(inner);
        Ok(FileEntry { path: rel, rows, sha256: sha256_file(&path)? })
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::io(path)(io::Error::other(e))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = File::open(path).map_err(Error::io(path))?;
    let mut h = Sha256::new();
    io::copy(&mut f, &mut h).map_err(Error::io(path))?;
    Ok(format!("{:x}", h.finalize()))
}

fn join_values<'a>(claims: impl Iterator<Item = &'a RoutedClaim>) -> String {
    claims.map(|c| c.value_label.as_str()).collect::<Vec<_>>().join(MULTI_VALUE_SEPARATOR)
}

/// Most frequent qualifier properties of a module's edges, ties by id.
fn top_qualifiers(edges: &[Edge], n: usize) -> Vec<Pid> {
    let mut counts: HashMap<Pid, u64> = HashMap::new();
    for e in edges {
        let props: BTreeSet<Pid> = e.claim.qualifiers.iter().map(|q| q.property).collect();
        for p in props {
            *counts.entry(p).or_default() += 1;
        }
    }
    let mut v: Vec<(Pid, u64)> = counts.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    v.into_iter().take(n).map(|(p, _)| p).collect()
}

fn write_edges(dir: &Path, module: &str, edges: &[Edge], top: &[Pid], compress: bool) -> Result<FileEntry> {
    let mut sink = Sink::create(dir, format!("edges/{module}.csv"), compress)?;
    let mut header = vec!["source".to_string(), "target".into(), "type".into(), "property".into()];
    header.extend(top.iter().map(|p| p.to_string()));
    header.push("qualifiers".into());
    sink.header(&header)?;
    for e in edges {
        let mut row = vec![e.source.to_string(), e.target.to_string(), e.module.to_string(), e.claim.property.to_string()];
        for p in top {
            let vals: Vec<String> = e
                .claim
                .qualifiers
                .iter()
                .filter(|q| q.property == *p)
                .map(|q| raw_value(&q.value))
                .collect();
            row.push(vals.join(MULTI_VALUE_SEPARATOR));
        }
        let rest: Vec<String> = e
            .claim
            .qualifiers
            .iter()
            .filter(|q| !top.contains(&q.property))
            .map(|q| format!("{}={}", q.property, raw_value(&q.value)))
            .collect();
        row.push(rest.join(";"));
        sink.row(&row)?;
    }
    sink.finish()
}

fn node_columns(schema: &SchemaConfig, category: &str) -> Vec<Pid> {
    let Some(c) = schema.category(category) else {
        return Vec::new();
    };
    let mut cols: Vec<Pid> = Vec::new();
    let props = c.core_properties.iter().chain(
        c.modules
            .iter()
            .filter(|m| m.kind == ModuleKind::Intrinsic)
            .flat_map(|m| &m.value_props),
    );
    for p in props.filter_map(|p| p.parse::<Pid>().ok()) {
        if !cols.contains(&p) {
            cols.push(p);
        }
    }
    cols
}

fn write_nodes(dir: &Path, category: &str, cols: &[Pid], rows: &[&ClassifiedRecord], compress: bool) -> Result<FileEntry> {
    let mut sink = Sink::create(dir, format!("nodes/{category}.csv"), compress)?;
    let mut header = vec!["id".to_string(), "label".into(), "description".into()];
    header.extend(cols.iter().map(|p| p.to_string()));
    sink.header(&header)?;
    for r in rows {
        let mut row = vec![
            r.id.to_string(),
            r.label.clone().unwrap_or_default(),
            r.description.clone().unwrap_or_default(),
        ];
        for p in cols {
            let attrs = r.buckets.core.iter().chain(&r.buckets.intrinsic).filter(|c| c.property == *p);
            row.push(join_values(attrs));
        }
        sink.row(&row)?;
    }
    sink.finish()
}

/// Three-pass export: one node file per category, one edge file per
/// relational module, then stub nodes for edge targets outside the core set.
///
/// Edges to core entities that the schema left unclassified are dropped and
/// counted, since such targets have neither a node nor a stub.
pub fn export_graph(
    records: &[ClassifiedRecord],
    core: &CoreIdSet,
    schema: &SchemaConfig,
    labels: &dyn LabelLookup,
    opts: &ExportOptions,
    out: impl AsRef<Path>,
) -> Result<ExportManifest> {
    let out = out.as_ref();
    for sub in ["nodes", "edges"] {
        let d = out.join(sub);
        if d.exists() {
            fs::remove_dir_all(&d).map_err(Error::io(&d))?;
        }
    }
    fs::create_dir_all(out).map_err(Error::io(out))?;

    let relational: BTreeSet<&str> = schema
        .categories
        .iter()
        .flat_map(|c| &c.modules)
        .filter(|m| m.kind == ModuleKind::Relational)
        .map(|m| m.name.as_str())
        .collect();
    if let Some(f) = &opts.module_filter {
        if let Some(unknown) = f.iter().find(|m| !relational.contains(m.as_str())) {
            return Err(Error::Structure(format!("`{unknown}` is not a relational module")));
        }
    }
    let modules: Vec<&str> = match &opts.module_filter {
        Some(f) => f.iter().map(String::as_str).collect(),
        None => relational.iter().copied().collect(),
    };

    let (edges, dropped) = collect_edges(records, core, opts.module_filter.as_ref());
    let empty = Vec::new();

    // pass 2: edges, one file per module
    let edge_files: Vec<Result<(String, Vec<Pid>, FileEntry)>> = modules
        .par_iter()
        .map(|m| {
            let es = edges.get(m).unwrap_or(&empty);
            let top = top_qualifiers(es, opts.qualifier_columns);
            let entry = write_edges(out, m, es, &top, opts.compress)?;
            Ok((m.to_string(), top, entry))
        })
        .collect();

    // pass 1: nodes, one file per category
    let endpoints: Option<HashSet<Qid>> = opts
        .module_filter
        .as_ref()
        .map(|_| edges.values().flatten().flat_map(|e| [e.source, e.target]).collect());
    let mut by_category: BTreeMap<&str, Vec<&ClassifiedRecord>> = BTreeMap::new();
    for r in records {
        let Some(c) = r.category.as_deref() else { continue };
        if endpoints.as_ref().is_some_and(|ep| !ep.contains(&r.id)) {
            continue;
        }
        by_category.entry(c).or_default().push(r);
    }
    for rows in by_category.values_mut() {
        rows.sort_by_key(|r| r.id);
    }
    let categories: Vec<&str> = match &endpoints {
        Some(_) => by_category.keys().copied().collect(),
        None => schema.categories.iter().map(|c| c.id.as_str()).collect(),
    };
    let node_files: Vec<Result<FileEntry>> = categories
        .par_iter()
        .map(|c| {
            let rows = by_category.get(c).map(Vec::as_slice).unwrap_or(&[]);
            write_nodes(out, c, &node_columns(schema, c), rows, opts.compress)
        })
        .collect();

    // pass 3: stubs
    let stub_ids: BTreeSet<Qid> = edges
        .values()
        .flatten()
        .map(|e| e.target)
        .filter(|t| !core.contains(*t))
        .collect();
    let mut sink = Sink::create(out, "stubs.csv".into(), opts.compress)?;
    sink.header(["id", "label"])?;
    let mut misses = 0;
    for id in &stub_ids {
        let label = labels.label(Ident::Item(*id)).unwrap_or_else(|| {
            misses += 1;
            id.to_string()
        });
        sink.row([id.to_string(), label])?;
    }
    let stub_entry = sink.finish()?;

    let mut manifest = ExportManifest {
        dropped_unclassified_targets: dropped,
        stub_label_misses: misses,
        module_filter: opts.module_filter.as_ref().map(|f| f.iter().cloned().collect()),
        ..Default::default()
    };
    for f in node_files {
        let f = f?;
        manifest.nodes += f.rows;
        manifest.files.push(f);
    }
    for f in edge_files {
        let (m, top, f) = f?;
        manifest.edges += f.rows;
        manifest.qualifier_columns.insert(m, top);
        manifest.files.push(f);
    }
    manifest.stubs = stub_entry.rows;
    manifest.files.push(stub_entry);
    let path = out.join(MANIFEST_FILE);
    fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(Error::io(&path))?;
    Ok(manifest)
}
