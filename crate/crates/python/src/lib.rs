//! Python bindings. Results that are plain data come back as Python dicts
//! and lists built from the same JSON the CLI prints.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use kgroute::classifier::{classify_shards as classify_shards_rs, read_classified_dir, Classifier as RsClassifier};
use kgroute::cleaning::{clean_shards as clean_shards_rs, CleaningRules, CoreIdSet};
use kgroute::export::{export_graph as export_graph_rs, ExportOptions, DEFAULT_QUALIFIER_COLUMNS};
use kgroute::ingest::{list_shards, EntityRecord, LabelLookup, LabelStore, MemoryLabels, NoLabels};
use kgroute::refinement::{refine as refine_rs, RefineConfig, RunStore, ScriptedOracle, ShardCorpus};
use kgroute::schema::{apply_diff, generate_extraction_prompt, load_schema, schema_stats, validate_schema, SchemaConfig, SchemaDiff};
use kgroute::ids::Ident;
use pyo3::exceptions::{PyKeyError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: kgroute::Error) -> PyErr {
    match e {
        kgroute::Error::InvalidId(_) | kgroute::Error::Parse { .. } | kgroute::Error::Structure(_) | kgroute::Error::Diff(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(format!("{}: {e}", e.kind())),
    }
}

fn to_py<'py>(py: Python<'py>, v: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_py<T: serde::de::DeserializeOwned>(py: Python<'_>, obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = py.import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// A schema loaded from a directory of category files.
#[pyclass(name = "Schema", module = "kgroute_py")]
pub struct PySchema {
    inner: SchemaConfig,
}

#[pymethods]
impl PySchema {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(PySchema { inner: load_schema(path).map_err(err)? })
    }

    #[getter]
    fn version(&self) -> String {
        self.inner.version.clone()
    }

    /// Category ids in priority order.
    #[getter]
    fn categories(&self) -> Vec<String> {
        self.inner.categories.iter().map(|c| c.id.clone()).collect()
    }

    /// Module names of one category.
    fn modules(&self, category: &str) -> PyResult<Vec<String>> {
        let c = self.inner.category(category).ok_or_else(|| PyKeyError::new_err(category.to_string()))?;
        Ok(c.modules.iter().map(|m| m.name.clone()).collect())
    }

    /// Violations and warnings as dicts. Annotation checks need `labels`.
    #[pyo3(signature = (labels=None))]
    fn validate<'py>(&self, py: Python<'py>, labels: Option<&PyLabels>) -> PyResult<Bound<'py, PyAny>> {
        let report = match labels {
            Some(l) => validate_schema(&self.inner, l),
            None => validate_schema(&self.inner, &NoLabels),
        };
        to_py(py, &serde_json::json!({
            "valid": report.is_valid(),
            "violations": report.violations,
            "warnings": report.warnings,
        }))
    }

    fn spans<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &schema_stats(&self.inner))
    }

    #[pyo3(signature = (display=None))]
    fn prompt(&self, display: Option<BTreeMap<String, String>>) -> String {
        generate_extraction_prompt(&self.inner, &display.unwrap_or_default())
    }

    /// A new schema with `diff` (a dict in round-file layout) applied.
    fn apply_diff(&self, py: Python<'_>, diff: &Bound<'_, PyAny>) -> PyResult<Self> {
        let diff: SchemaDiff = from_py(py, diff)?;
        Ok(PySchema { inner: apply_diff(&self.inner, &diff).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!("Schema(version={:?}, categories={})", self.inner.version, self.inner.categories.len())
    }
}

enum LabelsInner {
    Store(LabelStore),
    Memory(MemoryLabels),
}

/// Id → label lookup: a label store file, a `.tsv` sidecar, or a dict.
#[pyclass(name = "Labels", module = "kgroute_py")]
pub struct PyLabels {
    inner: LabelsInner,
}

impl LabelLookup for PyLabels {
    fn label(&self, id: Ident) -> Option<String> {
        match &self.inner {
            LabelsInner::Store(s) => s.label(id),
            LabelsInner::Memory(m) => m.label(id),
        }
    }

    fn ids_for_label(&self, label: &str) -> Vec<Ident> {
        match &self.inner {
            LabelsInner::Store(s) => s.ids_for_label(label),
            LabelsInner::Memory(m) => m.ids_for_label(label),
        }
    }
}

#[pymethods]
impl PyLabels {
    #[staticmethod]
    fn open(path: PathBuf) -> PyResult<Self> {
        let inner = if path.extension().is_some_and(|e| e == "tsv") {
            let mut m = MemoryLabels::new();
            m.extend_from_sidecar(&path).map_err(err)?;
            LabelsInner::Memory(m)
        } else {
            LabelsInner::Store(LabelStore::open(&path).map_err(err)?)
        };
        Ok(PyLabels { inner })
    }

    #[staticmethod]
    fn from_dict(labels: BTreeMap<String, String>) -> PyResult<Self> {
        let mut m = MemoryLabels::new();
        for (id, label) in labels {
            let id: Ident = id.parse().map_err(err)?;
            m.insert(id, label);
        }
        Ok(PyLabels { inner: LabelsInner::Memory(m) })
    }

    /// Build a label store file from dump shards and an optional sidecar.
    #[staticmethod]
    #[pyo3(signature = (shards, out, sidecar=None))]
    fn build(shards: PathBuf, out: PathBuf, sidecar: Option<PathBuf>) -> PyResult<Self> {
        let paths = list_shards(&shards).map_err(err)?;
        let store = kgroute::ingest::build_label_store(&paths, sidecar.as_deref(), &out).map_err(err)?;
        Ok(PyLabels { inner: LabelsInner::Store(store) })
    }

    fn get(&self, id: &str) -> PyResult<Option<String>> {
        let id: Ident = id.parse().map_err(err)?;
        Ok(self.label(id))
    }

    fn ids_for(&self, label: &str) -> Vec<String> {
        self.ids_for_label(label).iter().map(|i| i.to_string()).collect()
    }
}

/// Classifier compiled from a schema; classifies single entities.
#[pyclass(name = "Classifier", module = "kgroute_py")]
pub struct PyClassifier {
    inner: RsClassifier,
}

#[pymethods]
impl PyClassifier {
    #[new]
    fn new(schema: &PySchema) -> Self {
        PyClassifier { inner: RsClassifier::new(&schema.inner) }
    }

    /// Category id for a dump-JSON entity, or None.
    fn category(&self, entity: &str) -> PyResult<Option<String>> {
        let e = EntityRecord::from_dump_json(entity).map_err(err)?;
        Ok(self.inner.match_category(&e).map(str::to_string))
    }

    /// Full classification of a dump-JSON entity: category, modules,
    /// routed claims and rendered sentences.
    #[pyo3(signature = (entity, labels=None))]
    fn classify<'py>(&self, py: Python<'py>, entity: &str, labels: Option<&PyLabels>) -> PyResult<Bound<'py, PyAny>> {
        let e = EntityRecord::from_dump_json(entity).map_err(err)?;
        let r = match labels {
            Some(l) => self.inner.classify(&e, l),
            None => self.inner.classify(&e, &NoLabels),
        };
        let sentences: Vec<&str> = r.sentences().collect();
        let modules: Vec<&str> = r.modules().collect();
        let out = to_py(py, &r)?;
        out.set_item("sentences", sentences)?;
        out.set_item("module_names", modules)?;
        Ok(out)
    }
}

/// Cleaning cascade over a shard directory. Writes the core-id file and
/// returns the cleaning statistics.
#[pyfunction]
fn clean_shards<'py>(py: Python<'py>, shards: PathBuf, rules: PathBuf, core_out: PathBuf) -> PyResult<Bound<'py, PyAny>> {
    let rules = CleaningRules::load(rules).map_err(err)?;
    let (core, stats) = clean_shards_rs(&list_shards(&shards).map_err(err)?, &rules).map_err(err)?;
    core.write(core_out).map_err(err)?;
    to_py(py, &stats)
}

/// Classify a shard directory into columnar files under `out`.
#[pyfunction]
#[pyo3(signature = (shards, schema, labels, out, core_ids=None))]
fn classify_shards<'py>(
    py: Python<'py>,
    shards: PathBuf,
    schema: &PySchema,
    labels: &PyLabels,
    out: PathBuf,
    core_ids: Option<PathBuf>,
) -> PyResult<Bound<'py, PyAny>> {
    let core = core_ids.map(CoreIdSet::read).transpose().map_err(err)?;
    let stats = classify_shards_rs(&list_shards(&shards).map_err(err)?, core.as_ref(), &schema.inner, labels, Some(&out)).map_err(err)?;
    to_py(py, &stats)
}

/// Export a classified directory as node, edge and stub files.
#[pyfunction]
#[pyo3(signature = (classified, schema, labels, out, modules=None, core_ids=None, compress=false))]
#[allow(clippy::too_many_arguments)]
fn export_graph<'py>(
    py: Python<'py>,
    classified: PathBuf,
    schema: &PySchema,
    labels: &PyLabels,
    out: PathBuf,
    modules: Option<Vec<String>>,
    core_ids: Option<PathBuf>,
    compress: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let records = read_classified_dir(&classified).map_err(err)?;
    let core = match core_ids {
        Some(p) => CoreIdSet::read(p).map_err(err)?,
        None => CoreIdSet::from_ids(records.iter().map(|r| r.id)),
    };
    let opts = ExportOptions {
        module_filter: modules.map(|m| m.into_iter().collect::<BTreeSet<_>>()),
        qualifier_columns: DEFAULT_QUALIFIER_COLUMNS,
        compress,
    };
    let manifest = export_graph_rs(&records, &core, &schema.inner, labels, &opts, &out).map_err(err)?;
    to_py(py, &manifest)
}

/// Refinement loop with scripted oracle answers (JSON lines text). Rounds
/// and schema versions are written under `run`. Returns the stop reason,
/// final rates and the refined schema.
#[pyfunction]
#[pyo3(signature = (shards, schema, labels, script, run, theta_c=0.9, theta_m=0.9, max_rounds=10, auto_accept=true))]
#[allow(clippy::too_many_arguments)]
fn refine<'py>(
    py: Python<'py>,
    shards: PathBuf,
    schema: &PySchema,
    labels: &PyLabels,
    script: &str,
    run: PathBuf,
    theta_c: f64,
    theta_m: f64,
    max_rounds: usize,
    auto_accept: bool,
) -> PyResult<(Bound<'py, PyAny>, PySchema)> {
    let corpus = ShardCorpus { shards: list_shards(&shards).map_err(err)?, core: None, out: run.join("classified") };
    let mut oracle = ScriptedOracle::from_str(script).map_err(err)?;
    let cfg = RefineConfig { theta_c, theta_m, max_rounds, auto_accept, ..Default::default() };
    let store = RunStore::new(&run);
    let out = refine_rs(&corpus, &schema.inner, labels, &mut oracle, &cfg, Some(&store)).map_err(err)?;
    let summary = serde_json::json!({
        "stop": out.stop,
        "rounds": out.rounds.len(),
        "r_c": out.stats.r_c,
        "r_m": out.stats.r_m,
        "schema_version": out.schema.version,
    });
    Ok((to_py(py, &summary)?, PySchema { inner: out.schema }))
}

#[pymodule]
fn kgroute_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySchema>()?;
    m.add_class::<PyLabels>()?;
    m.add_class::<PyClassifier>()?;
    m.add_function(wrap_pyfunction!(clean_shards, m)?)?;
    m.add_function(wrap_pyfunction!(classify_shards, m)?)?;
    m.add_function(wrap_pyfunction!(export_graph, m)?)?;
    m.add_function(wrap_pyfunction!(refine, m)?)?;
    Ok(())
}
