mod common;

use std::time::Duration;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use common::{inputs, ok, Inputs};
use http_body_util::BodyExt;
use kgroute_cli::api::router;
use kgroute_cli::run::RunDir;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    // extractor rejections come back as plain text
    let v = serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into_owned()));
    (status, v)
}

async fn get(app: &Router, uri: &str) -> Value {
    let (s, v) = call(app, Method::GET, uri, None).await;
    assert_eq!(s, StatusCode::OK, "{uri}: {v}");
    v
}

/// A run stopped at its first round, waiting for review.
fn awaiting_review(seed: u64) -> (Inputs, String) {
    let i = inputs(seed);
    let run = i.p("run");
    ok(&["classify", "--shards", &i.p("shards"), "--schema", &i.p("schema"), "--labels", &i.p("labels.tsv"), "--out", &run]);
    let out = ok(&["refine", "--run", &run, "--schema", &i.p("schema"), "--oracle", &i.p("oracle.jsonl")]);
    assert_eq!(out["stop"], "awaiting_review", "{out}");
    (i, run)
}

#[tokio::test(flavor = "multi_thread")]
async fn read_endpoints_render_run_files() {
    let (_i, run) = awaiting_review(21);
    let app = router(RunDir::new(&run));

    let cov = get(&app, "/api/v1/coverage").await;
    assert!((cov["r_c"].as_f64().unwrap() - 0.60).abs() < 1e-9, "{cov}");
    assert_eq!(cov["total"], 1000);

    let fail = get(&app, "/api/v1/failures").await;
    assert_eq!(fail["unclassified"].as_array().unwrap().len(), 400);

    let cands = get(&app, "/api/v1/candidates?k_freq=1&k_hub=0").await;
    assert_eq!(cands.as_array().unwrap().len(), 1);

    let rounds = get(&app, "/api/v1/rounds").await;
    assert_eq!(rounds[0]["status"], "awaiting_review");
    let first = rounds[0]["index"].as_u64().unwrap();
    let r = get(&app, &format!("/api/v1/rounds/{first}")).await;
    assert_eq!(r["index"], first);
    let (s, _) = call(&app, Method::GET, "/api/v1/rounds/9", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);

    let spans = get(&app, "/api/v1/spans").await;
    assert!(spans.is_object());
    let val = get(&app, "/api/v1/validation").await;
    assert_eq!(val["valid"], true);
    let m = get(&app, "/api/v1/manifest").await;
    assert!(m["inputs"]["schema"]["sha256"].is_string());
    assert_eq!(get(&app, "/api/v1/jobs").await, json!([]));
}

#[tokio::test(flavor = "multi_thread")]
async fn review_then_apply_as_a_job() {
    let (_i, run) = awaiting_review(22);
    let app = router(RunDir::new(&run));

    let (s, v) = call(&app, Method::POST, "/api/v1/apply", None).await;
    assert_eq!(s, StatusCode::CONFLICT, "{v}");

    let decisions = get(&app, "/api/v1/decisions").await;
    let actionable: Vec<String> = decisions
        .as_array()
        .unwrap()
        .iter()
        .filter(|d| d["actionable"] == true)
        .map(|d| d["id"].as_str().unwrap().to_string())
        .collect();
    assert!(!actionable.is_empty());
    for id in &actionable {
        let uri = format!("/api/v1/decisions/{id}/review");
        let (s, v) = call(&app, Method::POST, &uri, Some(json!({"state": "accepted", "note": "ok"}))).await;
        assert_eq!(s, StatusCode::OK, "{v}");
        assert_eq!(v["version"], 1);
        assert_eq!(v["changed"], true);
        // the same review again changes nothing
        let (_, v) = call(&app, Method::POST, &uri, Some(json!({"state": "accepted", "note": "ok"}))).await;
        assert_eq!(v["version"], 1);
        assert_eq!(v["changed"], false);
    }
    let listed = get(&app, "/api/v1/decisions").await;
    let first = listed.as_array().unwrap().iter().find(|d| d["id"] == actionable[0].as_str()).unwrap();
    assert_eq!(first["review"], "accepted");
    assert_eq!(first["version"], 1);

    let (s, _) = call(&app, Method::POST, "/api/v1/decisions/r9-9/review", Some(json!({"state": "accepted"}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(&app, Method::POST, &format!("/api/v1/decisions/{}/review", actionable[0]), Some(json!({"state": "maybe"}))).await;
    assert!(s.is_client_error());

    let (s, v) = call(&app, Method::POST, "/api/v1/apply", None).await;
    assert_eq!(s, StatusCode::ACCEPTED, "{v}");
    let job = v["job"].as_str().unwrap().to_string();
    let mut state = Value::Null;
    for _ in 0..600 {
        state = get(&app, &format!("/api/v1/jobs/{job}")).await;
        if state["state"] != "running" {
            break;
        }
        tokio::time::sleep(Duration::from_millis(50)).await;
    }
    assert_eq!(state["state"], "succeeded", "{state}");
    assert_eq!(state["result"]["status"], "applied");

    let rounds = get(&app, "/api/v1/rounds").await;
    assert_eq!(rounds[0]["status"], "applied");
    let cov = get(&app, "/api/v1/coverage").await;
    assert!(cov["r_c"].as_f64().unwrap() > 0.60);

    // nothing left to apply, and the round no longer takes reviews
    let (s, _) = call(&app, Method::POST, "/api/v1/apply", None).await;
    assert_eq!(s, StatusCode::CONFLICT);
    let (s, _) = call(&app, Method::POST, &format!("/api/v1/decisions/{}/review", actionable[0]), Some(json!({"state": "rejected"}))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    let m = get(&app, "/api/v1/manifest").await;
    assert!(m["stages"].as_array().unwrap().iter().any(|s| s["stage"] == "apply"));
}

#[tokio::test(flavor = "multi_thread")]
async fn missing_run_files_are_errors_not_panics() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(RunDir::new(dir.path()));
    let (s, v) = call(&app, Method::GET, "/api/v1/coverage", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert!(v["error"]["message"].is_string());
    assert_eq!(get(&app, "/api/v1/rounds").await, json!([]));
}
