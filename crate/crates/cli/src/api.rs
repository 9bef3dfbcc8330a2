//! Local HTTP service over a run directory. Every read endpoint renders
//! from the persisted run files; writes go to the review journal or start
//! an apply job.

use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use anyhow::Result;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use kgroute::classifier::read_classified_dir;
use kgroute::refinement::{candidate_types, compute_failures, overlay_reviews, ReviewJournal, ReviewState, RoundStatus};
use kgroute::schema::{schema_stats, validate_schema};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::manifest::{now_millis, RunManifest};
use crate::run::{apply_accepted, has_accepted, Labels, RunDir};

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, kind: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, kind, message: message.into() }
    }
}

impl From<anyhow::Error> for ApiError {
    fn from(e: anyhow::Error) -> Self {
        let kind = e.downcast_ref::<kgroute::Error>().map_or("error", |k| k.kind());
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, kind, format!("{e:#}"))
    }
}

impl From<kgroute::Error> for ApiError {
    fn from(e: kgroute::Error) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.kind(), e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({"error": {"kind": self.kind, "message": self.message}}))).into_response()
    }
}

type ApiResult<T = Json<Value>> = std::result::Result<T, ApiError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobState {
    Running,
    Succeeded,
    Failed,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Job {
    pub id: String,
    pub kind: String,
    pub state: JobState,
    pub started_at: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finished_at: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

struct Inner {
    run: RunDir,
    // one writer at a time on the journal
    review: Mutex<()>,
    jobs: Mutex<Vec<Job>>,
}

#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    pub fn new(run: RunDir) -> Self {
        AppState(Arc::new(Inner { run, review: Mutex::new(()), jobs: Mutex::new(Vec::new()) }))
    }
}

pub fn router(run: RunDir) -> Router {
    Router::new()
        .route("/api/v1/coverage", get(coverage))
        .route("/api/v1/failures", get(failures))
        .route("/api/v1/candidates", get(candidates))
        .route("/api/v1/rounds", get(rounds))
        .route("/api/v1/rounds/{index}", get(round))
        .route("/api/v1/decisions", get(decisions))
        .route("/api/v1/decisions/{id}/review", post(review))
        .route("/api/v1/apply", post(apply))
        .route("/api/v1/spans", get(spans))
        .route("/api/v1/validation", get(validation))
        .route("/api/v1/manifest", get(manifest))
        .route("/api/v1/jobs", get(jobs))
        .route("/api/v1/jobs/{id}", get(job))
        .with_state(AppState::new(run))
}

pub async fn serve(run: RunDir, bind: SocketAddr) -> Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(run))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

pub fn serve_blocking(run: RunDir, bind: SocketAddr) -> Result<()> {
    tokio::runtime::Runtime::new()?.block_on(serve(run, bind))
}

fn to_value(v: impl Serialize) -> ApiResult {
    Ok(Json(serde_json::to_value(v).map_err(kgroute::Error::from)?))
}

fn not_found(what: impl Into<String>) -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", what)
}

fn class_stats(run: &RunDir) -> ApiResult<kgroute::classifier::ClassStats> {
    if !run.class_stats().exists() {
        return Err(not_found("the run has no classification output"));
    }
    Ok(run.read_class_stats()?)
}

async fn coverage(State(s): State<AppState>) -> ApiResult {
    let st = class_stats(&s.0.run)?;
    Ok(Json(json!({
        "total": st.total,
        "classified": st.classified,
        "with_modules": st.with_modules,
        "unclassified": st.unclassified_ids.len(),
        "no_module": st.no_module_ids.len(),
        "r_c": st.r_c,
        "r_m": st.r_m,
        "per_category": st.per_category,
        "per_module": st.per_module,
        "buckets": st.buckets,
        "label_misses": st.label_misses,
        "non_core": st.non_core,
    })))
}

async fn failures(State(s): State<AppState>) -> ApiResult {
    to_value(compute_failures(&class_stats(&s.0.run)?))
}

#[derive(Debug, Deserialize)]
struct CandidateQuery {
    #[serde(default = "default_k")]
    k_freq: usize,
    #[serde(default = "default_k")]
    k_hub: usize,
}

fn default_k() -> usize {
    20
}

async fn candidates(State(s): State<AppState>, Query(q): Query<CandidateQuery>) -> ApiResult {
    let run = &s.0.run;
    let m = RunManifest::load(&run.root)?;
    let labels = Labels::open(&m.input("labels")?)?;
    let records = read_classified_dir(run.classified())?;
    to_value(candidate_types(&records, &labels, q.k_freq, q.k_hub))
}

async fn rounds(State(s): State<AppState>) -> ApiResult {
    let rounds = s.0.run.store().read_rounds()?;
    let rows: Vec<Value> = rounds
        .iter()
        .map(|r| {
            json!({
                "index": r.index,
                "status": r.status,
                "schema_version": r.schema_version,
                "before": {"r_c": r.before.r_c, "r_m": r.before.r_m},
                "after": r.after.as_ref().map(|a| json!({"r_c": a.r_c, "r_m": a.r_m})),
                "decisions": r.decisions.len(),
                "edits": r.diff.edit_count(),
            })
        })
        .collect();
    Ok(Json(Value::Array(rows)))
}

async fn round(State(s): State<AppState>, Path(index): Path<usize>) -> ApiResult {
    let rounds = s.0.run.store().read_rounds()?;
    let r = rounds.into_iter().find(|r| r.index == index).ok_or_else(|| not_found(format!("no round {index}")))?;
    to_value(r)
}

async fn decisions(State(s): State<AppState>) -> ApiResult {
    let store = s.0.run.store();
    let journal = ReviewJournal::open(store.journal_path())?;
    let mut out = Vec::new();
    for mut r in store.read_rounds()? {
        overlay_reviews(&mut r.decisions, &journal);
        for d in r.decisions {
            let version = journal.get(&d.id).map_or(0, |e| e.version);
            let mut v = serde_json::to_value(&d).map_err(kgroute::Error::from)?;
            v["version"] = version.into();
            v["actionable"] = d.is_actionable().into();
            v["round_status"] = serde_json::to_value(r.status).map_err(kgroute::Error::from)?;
            out.push(v);
        }
    }
    Ok(Json(Value::Array(out)))
}

#[derive(Debug, Deserialize)]
pub struct ReviewBody {
    pub state: ReviewState,
    #[serde(default)]
    pub note: Option<String>,
}

async fn review(State(s): State<AppState>, Path(id): Path<String>, Json(body): Json<ReviewBody>) -> ApiResult {
    let _guard = s.0.review.lock().unwrap_or_else(|e| e.into_inner());
    let store = s.0.run.store();
    let rounds = store.read_rounds()?;
    let (round, decision) = rounds
        .iter()
        .find_map(|r| r.decisions.iter().find(|d| d.id == id).map(|d| (r, d)))
        .ok_or_else(|| not_found(format!("no decision `{id}`")))?;
    if round.status != RoundStatus::AwaitingReview {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "conflict",
            format!("round {} is not awaiting review", round.index),
        ));
    }
    if body.state == ReviewState::Accepted && !decision.is_actionable() {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "not_actionable",
            format!("decision `{id}` cannot be accepted: {}", decision.issues.join("; ")),
        ));
    }
    let mut journal = ReviewJournal::open(store.journal_path())?;
    let (entry, changed) = journal.set(&id, body.state, body.note)?;
    Ok(Json(json!({"entry": entry, "version": entry.version, "changed": changed})))
}

async fn apply(State(s): State<AppState>) -> ApiResult<(StatusCode, Json<Value>)> {
    let mut jobs = s.0.jobs.lock().unwrap_or_else(|e| e.into_inner());
    if jobs.iter().any(|j| j.state == JobState::Running) {
        return Err(ApiError::new(StatusCode::CONFLICT, "conflict", "a job is already running"));
    }
    if !has_accepted(&s.0.run)? {
        return Err(ApiError::new(StatusCode::CONFLICT, "conflict", "no accepted decisions to apply"));
    }
    let id = format!("job-{}", jobs.len() + 1);
    jobs.push(Job {
        id: id.clone(),
        kind: "apply".into(),
        state: JobState::Running,
        started_at: now_millis(),
        finished_at: None,
        result: None,
        error: None,
    });
    drop(jobs);
    let state = s.clone();
    let job_id = id.clone();
    tokio::spawn(async move {
        let run = state.0.run.clone();
        let outcome = tokio::task::spawn_blocking(move || apply_accepted(&run)).await;
        let mut jobs = state.0.jobs.lock().unwrap_or_else(|e| e.into_inner());
        let Some(job) = jobs.iter_mut().find(|j| j.id == job_id) else { return };
        job.finished_at = Some(now_millis());
        match outcome {
            Ok(Ok(summary)) => {
                job.state = JobState::Succeeded;
                job.result = serde_json::to_value(summary).ok();
            }
            Ok(Err(e)) => {
                job.state = JobState::Failed;
                job.error = Some(format!("{e:#}"));
            }
            Err(e) => {
                job.state = JobState::Failed;
                job.error = Some(e.to_string());
            }
        }
    });
    Ok((StatusCode::ACCEPTED, Json(json!({"job": id}))))
}

async fn spans(State(s): State<AppState>) -> ApiResult {
    let m = RunManifest::load(&s.0.run.root)?;
    to_value(schema_stats(&s.0.run.schema(&m)?))
}

async fn validation(State(s): State<AppState>) -> ApiResult {
    let m = RunManifest::load(&s.0.run.root)?;
    let schema = s.0.run.schema(&m)?;
    let labels = Labels::open(&m.input("labels")?)?;
    let report = validate_schema(&schema, &labels);
    Ok(Json(json!({
        "valid": report.is_valid(),
        "violations": report.violations,
        "warnings": report.warnings,
    })))
}

async fn manifest(State(s): State<AppState>) -> ApiResult {
    to_value(RunManifest::load(&s.0.run.root)?)
}

async fn jobs(State(s): State<AppState>) -> ApiResult {
    to_value(&*s.0.jobs.lock().unwrap_or_else(|e| e.into_inner()))
}

async fn job(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let jobs = s.0.jobs.lock().unwrap_or_else(|e| e.into_inner());
    let j = jobs.iter().find(|j| j.id == id).ok_or_else(|| not_found(format!("no job `{id}`")))?;
    to_value(j)
}
