use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use kgroute::classifier::{classify_shards, read_classified_dir};
use kgroute::cleaning::{clean_shards, CleaningRules, CoreIdSet};
use kgroute::export::{export_graph, export_profiles, mean_type_labels, write_profiles, ExportOptions, ProfileConfig, DEFAULT_QUALIFIER_COLUMNS};
use kgroute::ids::Qid;
use kgroute::ingest::{build_label_store, list_shards, NoLabels};
use kgroute::refinement::{agreement_audit, category_analysis, open_oracle, refine, RefineConfig};
use kgroute::schema::{generate_extraction_prompt, load_schema, schema_stats, validate_schema, Warning};

use crate::manifest::{now_millis, RunManifest};
use crate::run::{apply_accepted, Labels, RunDir, CLASSIFIED, CORE_IDS};

/// Schema-driven classification of entity dumps into typed property graphs.
#[derive(Debug, Parser)]
#[command(name = "kgroute", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the persistent label store from dump shards and a sidecar file.
    LabelsBuild(LabelsBuildArgs),
    /// Separate core entities from infrastructure and bulk imports.
    Clean(CleanArgs),
    /// Classify shards against a schema into the run directory.
    Classify(ClassifyArgs),
    /// Check a schema directory and print one JSON line per finding.
    Validate(ValidateArgs),
    /// Run the refinement loop, or apply reviewed decisions.
    Refine(RefineArgs),
    /// Per-category coverage, type frequencies and module spans.
    Analyze(AnalyzeArgs),
    /// Write node, edge and stub files for a classified run.
    Export(ExportArgs),
    /// Print the extraction prompt derived from a schema.
    Prompt(PromptArgs),
    /// Compare run categories against an external labeling.
    Audit(AuditArgs),
    /// Serve the HTTP API over a run directory.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct LabelsBuildArgs {
    /// Directory of dump shards.
    #[arg(long)]
    pub shards: PathBuf,
    /// Two-column property label file (id, label), tab separated.
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
    /// Label store file to create.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CleanArgs {
    /// Directory of dump shards.
    #[arg(long)]
    pub shards: PathBuf,
    /// Cleaning rules file.
    #[arg(long)]
    pub rules: PathBuf,
    /// Run directory; receives core.ids and stats/cleaning.json.
    #[arg(long)]
    pub run: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Directory of dump shards.
    #[arg(long)]
    pub shards: PathBuf,
    /// Schema directory.
    #[arg(long)]
    pub schema: PathBuf,
    /// Core-id file; defaults to the run's core.ids when present, else every entity.
    #[arg(long)]
    pub core_ids: Option<PathBuf>,
    /// Label store, or a .tsv sidecar.
    #[arg(long)]
    pub labels: PathBuf,
    /// Run directory; receives classified/ with one columnar file per shard.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Schema directory.
    #[arg(long)]
    pub schema: PathBuf,
    /// Label store or .tsv sidecar used for annotation checks.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Also print the module span report.
    #[arg(long)]
    pub spans: bool,
}

#[derive(Debug, Args)]
pub struct RefineArgs {
    /// Run directory.
    #[arg(long)]
    pub run: PathBuf,
    /// Seed schema directory.
    #[arg(long, required_unless_present = "apply")]
    pub schema: Option<PathBuf>,
    /// Oracle: a scripted answer file, `exec:<command>`, or `interactive`.
    #[arg(long, required_unless_present = "apply")]
    pub oracle: Option<String>,
    /// Classification-rate threshold.
    #[arg(long, default_value_t = 0.9)]
    pub theta_c: f64,
    /// Module-rate threshold.
    #[arg(long, default_value_t = 0.9)]
    pub theta_m: f64,
    /// Maximum number of oracle rounds.
    #[arg(long, default_value_t = 10)]
    pub max_rounds: usize,
    /// Candidate types taken by unclassified frequency.
    #[arg(long, default_value_t = 20)]
    pub k_freq: usize,
    /// Candidate types taken by inbound references.
    #[arg(long, default_value_t = 20)]
    pub k_hub: usize,
    /// Accept every valid decision without review.
    #[arg(long)]
    pub auto_accept: bool,
    /// Seconds to wait for an external oracle per request.
    #[arg(long, default_value_t = 60)]
    pub oracle_timeout: u64,
    /// Directory of dump shards; defaults to the run's recorded shards.
    #[arg(long)]
    pub shards: Option<PathBuf>,
    /// Label store or .tsv sidecar; defaults to the run's recorded labels.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Apply the reviewed decisions of the round awaiting review and stop.
    #[arg(long)]
    pub apply: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Run directory with classified output.
    #[arg(long)]
    pub run: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Run directory with classified output.
    #[arg(long)]
    pub run: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated relational modules to keep.
    #[arg(long, value_delimiter = ',')]
    pub modules: Option<Vec<String>>,
    /// Qualifier properties promoted to their own edge columns.
    #[arg(long, default_value_t = DEFAULT_QUALIFIER_COLUMNS)]
    pub qualifier_columns: usize,
    /// Zstandard-compress every file.
    #[arg(long)]
    pub compress: bool,
    /// Also write profiles.jsonl.
    #[arg(long)]
    pub profiles: bool,
    /// JSON object mapping category ids to display names, for profiles.
    #[arg(long)]
    pub display: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PromptArgs {
    /// Schema directory.
    #[arg(long)]
    pub schema: PathBuf,
    /// JSON object mapping category ids to display names.
    #[arg(long)]
    pub display: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Run directory with classified output.
    #[arg(long)]
    pub run: PathBuf,
    /// Tab-separated entity id and external label per line.
    #[arg(long)]
    pub external: PathBuf,
    /// YAML map from category id to the compatible external labels.
    #[arg(long)]
    pub mapping: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Run directory.
    #[arg(long)]
    pub run: PathBuf,
    /// Address to bind.
    #[arg(long, default_value = "127.0.0.1:8787")]
    pub bind: SocketAddr,
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn write_json(path: &Path, v: &impl serde::Serialize) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, serde_json::to_string_pretty(v)?).with_context(|| format!("writing {}", path.display()))
}

fn read_display(path: Option<&Path>) -> Result<BTreeMap<String, String>> {
    match path {
        None => Ok(BTreeMap::new()),
        Some(p) => Ok(serde_json::from_str(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?),
    }
}

/// An error the user caused by how the command was called.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Validation found violations; the report has already been printed.
#[derive(Debug)]
pub struct InvalidSchema(pub usize);

impl std::fmt::Display for InvalidSchema {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} violation(s)", self.0)
    }
}

impl std::error::Error for InvalidSchema {}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::LabelsBuild(a) => labels_build(a),
        Command::Clean(a) => clean(a),
        Command::Classify(a) => classify(a),
        Command::Validate(a) => validate(a),
        Command::Refine(a) => refine_cmd(a),
        Command::Analyze(a) => analyze(a),
        Command::Export(a) => export(a),
        Command::Prompt(a) => prompt(a),
        Command::Audit(a) => audit(a),
        Command::Serve(a) => crate::api::serve_blocking(RunDir::new(a.run), a.bind),
    }
}

fn labels_build(a: LabelsBuildArgs) -> Result<()> {
    let shards = list_shards(&a.shards)?;
    let store = build_label_store(&shards, a.sidecar.as_deref(), &a.out)?;
    print_json(&serde_json::json!({"shards": shards.len(), "labels": store.len()?, "store": a.out}))
}

fn clean(a: CleanArgs) -> Result<()> {
    let started = now_millis();
    let mut m = RunManifest::load_or_new(&a.run)?;
    m.admit("shards", &a.shards)?;
    m.admit("rules", &a.rules)?;
    let rules = CleaningRules::load(&a.rules)?;
    let (core, stats) = clean_shards(&list_shards(&a.shards)?, &rules)?;
    let run = RunDir::new(&a.run);
    fs::create_dir_all(&a.run)?;
    core.write(run.core_ids())?;
    write_json(&run.stats("cleaning.json"), &stats)?;
    m.stage("clean", started, &["shards", "rules"], &[("core_ids", CORE_IDS), ("stats", "stats/cleaning.json")]);
    m.save(&a.run)?;
    print_json(&stats)
}

fn classify(a: ClassifyArgs) -> Result<()> {
    let started = now_millis();
    let run = RunDir::new(&a.out);
    let mut m = RunManifest::load_or_new(&a.out)?;
    m.admit("shards", &a.shards)?;
    m.admit("schema", &a.schema)?;
    m.admit("labels", &a.labels)?;
    let core = match &a.core_ids {
        Some(p) => {
            m.admit("core_ids", p)?;
            Some(CoreIdSet::read(p)?)
        }
        None => run.core()?,
    };
    let schema = load_schema(&a.schema)?;
    let labels = Labels::open(&a.labels)?;
    let report = validate_schema(&schema, &labels);
    if !report.is_valid() {
        eprint!("{}", report.to_json_lines());
        return Err(InvalidSchema(report.violations.len()).into());
    }
    let stats = classify_shards(&list_shards(&a.shards)?, core.as_ref(), &schema, &labels, Some(&run.classified()))?;
    m.schema_version = Some(schema.version.clone());
    let mut inputs = vec!["shards", "schema", "labels"];
    if a.core_ids.is_some() {
        inputs.push("core_ids");
    }
    m.stage("classify", started, &inputs, &[("classified", CLASSIFIED), ("stats", "classified/class_stats.json")]);
    m.save(&a.out)?;
    print_json(&serde_json::json!({
        "total": stats.total,
        "classified": stats.classified,
        "r_c": stats.r_c,
        "r_m": stats.r_m,
        "non_core": stats.non_core,
        "label_misses": stats.label_misses,
    }))
}

fn validate(a: ValidateArgs) -> Result<()> {
    let schema = load_schema(&a.schema)?;
    let mut report = match &a.labels {
        Some(p) => validate_schema(&schema, &Labels::open(p)?),
        None => {
            let mut r = validate_schema(&schema, &NoLabels);
            r.warnings.retain(|w| !matches!(w, Warning::UnknownToStore { .. }));
            r
        }
    };
    report.warnings.sort_by_key(|w| serde_json::to_string(w).unwrap_or_default());
    print!("{}", report.to_json_lines());
    if a.spans {
        print!("{}", schema_stats(&schema).to_json_lines());
    }
    if !report.is_valid() {
        return Err(InvalidSchema(report.violations.len()).into());
    }
    Ok(())
}

fn refine_cmd(a: RefineArgs) -> Result<()> {
    let run = RunDir::new(&a.run);
    if a.apply {
        let summary = apply_accepted(&run)?;
        return print_json(&summary);
    }
    let started = now_millis();
    let mut m = RunManifest::load_or_new(&a.run)?;
    let schema_dir = a.schema.as_ref().expect("required unless --apply");
    let oracle_arg = a.oracle.as_deref().expect("required unless --apply");
    m.admit("schema", schema_dir)?;
    if let Some(p) = &a.shards {
        m.admit("shards", p)?;
    }
    if let Some(p) = &a.labels {
        m.admit("labels", p)?;
    }
    for name in ["shards", "labels"] {
        if !m.has_input(name) {
            return Err(UsageError(format!("--{name} is required: the run has no recorded {name} input")).into());
        }
    }
    let mut inputs = vec!["schema", "shards", "labels"];
    if !oracle_arg.starts_with("exec:") && oracle_arg != "interactive" {
        m.admit("oracle", Path::new(oracle_arg))?;
        inputs.push("oracle");
    }
    let s0 = load_schema(schema_dir)?;
    let labels = Labels::open(&m.input("labels")?)?;
    let corpus = run.corpus(&m)?;
    let mut oracle = open_oracle(oracle_arg, Duration::from_secs(a.oracle_timeout))?;
    let cfg = RefineConfig {
        theta_c: a.theta_c,
        theta_m: a.theta_m,
        max_rounds: a.max_rounds,
        k_freq: a.k_freq,
        k_hub: a.k_hub,
        auto_accept: a.auto_accept,
    };
    // A fresh loop replaces earlier rounds; the old review trail is kept aside.
    let store = run.store();
    if store.rounds_dir().exists() {
        fs::remove_dir_all(store.rounds_dir())?;
    }
    if store.journal_path().exists() {
        fs::rename(store.journal_path(), a.run.join(format!("review-{started}.jsonl")))?;
    }
    let out = refine(&corpus, &s0, &labels, oracle.as_mut(), &cfg, Some(&store))?;
    m.schema_version = Some(out.schema.version.clone());
    m.stage("refine", started, &inputs, &[("rounds", "rounds"), ("schema", "schema/current"), ("classified", CLASSIFIED)]);
    m.save(&a.run)?;
    print_json(&serde_json::json!({
        "stop": out.stop,
        "rounds": out.rounds.len(),
        "r_c": out.stats.r_c,
        "r_m": out.stats.r_m,
        "schema_version": out.schema.version,
    }))
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    let started = now_millis();
    let run = RunDir::new(&a.run);
    let mut m = RunManifest::load(&a.run)?;
    let schema = run.schema(&m)?;
    let labels = Labels::open(&m.input("labels")?)?;
    let records = read_classified_dir(run.classified())?;
    let report = category_analysis(&records, &schema, &labels);
    write_json(&run.stats("analysis.json"), &report)?;
    let spans = schema_stats(&schema).to_json_lines();
    fs::write(run.stats("spans.jsonl"), &spans)?;
    m.stage("analyze", started, &["labels"], &[("analysis", "stats/analysis.json"), ("spans", "stats/spans.jsonl")]);
    m.save(&a.run)?;
    print_json(&report)
}

fn export(a: ExportArgs) -> Result<()> {
    let started = now_millis();
    let run = RunDir::new(&a.run);
    let mut m = RunManifest::load(&a.run)?;
    let schema = run.schema(&m)?;
    let labels = Labels::open(&m.input("labels")?)?;
    let records = read_classified_dir(run.classified())?;
    let core = match run.core()? {
        Some(c) => c,
        // without a cleaning stage every classified input entity is core
        None => CoreIdSet::from_ids(records.iter().map(|r| r.id)),
    };
    let opts = ExportOptions {
        module_filter: a.modules.map(|v| v.into_iter().collect::<BTreeSet<_>>()),
        qualifier_columns: a.qualifier_columns,
        compress: a.compress,
    };
    let manifest = export_graph(&records, &core, &schema, &labels, &opts, &a.out)?;
    let mut summary = serde_json::json!({
        "nodes": manifest.nodes,
        "edges": manifest.edges,
        "stubs": manifest.stubs,
        "dropped_unclassified_targets": manifest.dropped_unclassified_targets,
        "out": a.out,
    });
    if a.profiles {
        let cfg = ProfileConfig { display: read_display(a.display.as_deref())?, ..Default::default() };
        let profiles = export_profiles(&records, &cfg);
        write_profiles(&profiles, a.out.join("profiles.jsonl"))?;
        summary["profiles"] = profiles.len().into();
        summary["mean_type_labels"] = mean_type_labels(&profiles).into();
    }
    m.stage("export", started, &["labels"], &[("export", &a.out.to_string_lossy())]);
    m.save(&a.run)?;
    print_json(&summary)
}

fn prompt(a: PromptArgs) -> Result<()> {
    let schema = load_schema(&a.schema)?;
    let display = read_display(a.display.as_deref())?;
    print!("{}", generate_extraction_prompt(&schema, &display));
    Ok(())
}

fn audit(a: AuditArgs) -> Result<()> {
    let started = now_millis();
    let run = RunDir::new(&a.run);
    let mut m = RunManifest::load(&a.run)?;
    m.admit("external_labels", &a.external)?;
    m.admit("audit_mapping", &a.mapping)?;
    let mut external = BTreeMap::new();
    let text = fs::read_to_string(&a.external).with_context(|| format!("reading {}", a.external.display()))?;
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#')) {
        let Some((id, label)) = line.split_once('\t') else {
            bail!("{}:{}: expected `<id>\\t<label>`", a.external.display(), i + 1);
        };
        let id: Qid = id.trim().parse().with_context(|| format!("{}:{}", a.external.display(), i + 1))?;
        external.insert(id, label.trim().to_string());
    }
    let mapping: BTreeMap<String, BTreeSet<String>> = serde_yaml::from_str(&fs::read_to_string(&a.mapping)?)
        .with_context(|| format!("parsing {}", a.mapping.display()))?;
    let records = read_classified_dir(run.classified())?;
    let report = agreement_audit(&records, &external, &mapping);
    write_json(&run.stats("audit.json"), &report)?;
    m.stage("audit", started, &["external_labels", "audit_mapping"], &[("audit", "stats/audit.json")]);
    m.save(&a.run)?;
    print_json(&report)
}
