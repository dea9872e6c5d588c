use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use lightpath::data::Resources;
use lightpath::gateway::MockGateway;
use lightpath::manager::SessionManager;
use lightpath::pipeline::{Engine, EngineSettings};
use lightpath::service::router;
use lightpath::store::{EventStore, JsonlStore, MemoryStore};
use serde_json::{json, Value};
use tower::ServiceExt;

const CASE1: &str = "We need a high-availability optical network connecting SITE1 (core), SITE2 (edge) and SITE3 (hub) support continuous operation with at least 3 geographically disjoint fiber paths between each pair of sites Maximum acceptable latency per path is 10 milliseconds Our total budget for components is $1500000";
const CASE2: &str = "Build optical network with ROADM equipment and regulatory compliance";

fn app_with(store: Box<dyn EventStore>, auto_advance: bool) -> Router {
    let engine = Engine::new(
        Arc::new(Resources::bundled()),
        Arc::new(MockGateway::bundled()),
        EngineSettings {
            auto_advance,
            ..EngineSettings::default()
        },
    );
    router(Arc::new(SessionManager::new(Arc::new(engine), store).unwrap()))
}

fn app() -> Router {
    app_with(Box::new(MemoryStore), true)
}

fn persistent(dir: &Path) -> Router {
    app_with(Box::new(JsonlStore::open(dir).unwrap()), true)
}

async fn send(app: &Router, method: &str, path: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(path);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()));
    (status, value)
}

async fn create(app: &Router, text: &str) -> Value {
    let (status, body) = send(app, "POST", "/intents", Some(json!({ "text": text }))).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    body
}

#[tokio::test]
async fn case_one_design_over_http() {
    let app = app();
    let s = create(&app, CASE1).await;
    assert_eq!(s["state"], "DesignReady");
    let id = s["session_id"].as_str().unwrap();
    let (status, design) = send(&app, "GET", &format!("/sessions/{id}/design"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(design["cost_breakdown"]["grand_total"], 1_400_000);
    let (status, plan) = send(&app, "GET", &format!("/sessions/{id}/plan"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(plan["plan"]["steps"].as_array().unwrap().len(), 16);
    assert_eq!(plan["validation"]["valid"], true);
    assert!(plan["problem"].as_str().unwrap().contains("(define (problem"));
    let (status, report) = send(&app, "GET", &format!("/sessions/{id}/report"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(report.as_str().unwrap().contains("$1,400,000"));
    for part in ["intent", "guidance", "feasibility"] {
        let (status, _) = send(&app, "GET", &format!("/sessions/{id}/{part}"), None).await;
        assert_eq!(status, StatusCode::OK, "{part}");
    }
    let timings = s["timings"].as_array().unwrap();
    assert!(timings.iter().any(|t| t["stage"] == "planning"));
}

#[tokio::test]
async fn unknown_session_is_404() {
    let app = app();
    let (status, _) = send(&app, "GET", "/sessions/00000000-0000-0000-0000-000000000000", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = send(&app, "GET", "/sessions/not-a-uuid", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = send(
        &app,
        "POST",
        "/sessions/00000000-0000-0000-0000-000000000000/clarify",
        Some(json!({ "text": "x" })),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn clarify_on_finished_session_is_409() {
    let app = app();
    let s = create(&app, CASE1).await;
    let id = s["session_id"].as_str().unwrap();
    let (status, _) = send(&app, "POST", &format!("/sessions/{id}/clarify"), Some(json!({ "text": "x" }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = send(&app, "POST", &format!("/sessions/{id}/advance"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn missing_artifact_is_404_and_empty_text_400() {
    let app = app();
    let s = create(&app, CASE2).await;
    let id = s["session_id"].as_str().unwrap();
    let (status, _) = send(&app, "GET", &format!("/sessions/{id}/design"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = send(&app, "POST", "/intents", Some(json!({ "text": "  " }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn case_two_clarification_flow() {
    let app = app();
    let s = create(&app, CASE2).await;
    assert_eq!(s["state"], "AwaitingClarification");
    assert_eq!(s["clarification"]["error_kind"], "MissingSites");
    assert_eq!(
        s["clarification"]["hint"],
        "Please specify which sites/facilities you want to connect."
    );
    let id = s["session_id"].as_str().unwrap();
    let (status, s) = send(
        &app,
        "POST",
        &format!("/sessions/{id}/clarify"),
        Some(json!({ "text": "SITE1, SITE2 and SITE3" })),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(s["state"], "DesignReady");
    assert_eq!(s["clarification"], Value::Null);
    assert_eq!(s["clarifications"], json!(["SITE1, SITE2 and SITE3"]));
}

#[tokio::test]
async fn step_mode_over_http() {
    let app = app_with(Box::new(MemoryStore), false);
    let s = create(&app, CASE1).await;
    assert_eq!(s["state"], "Parsed");
    let id = s["session_id"].as_str().unwrap();
    let mut states = Vec::new();
    loop {
        let (status, s) = send(&app, "POST", &format!("/sessions/{id}/advance"), None).await;
        if status == StatusCode::CONFLICT {
            break;
        }
        assert_eq!(status, StatusCode::OK);
        states.push(s["state"].as_str().unwrap().to_owned());
    }
    assert_eq!(states, ["Enriched", "Planning", "PlanReady", "DesignReady"]);
}

#[tokio::test]
async fn sessions_survive_restart() {
    let dir = tempfile::tempdir().unwrap();
    let (id, before) = {
        let app = persistent(dir.path());
        let s = create(&app, CASE2).await;
        let id = s["session_id"].as_str().unwrap().to_owned();
        let (_, before) = send(&app, "GET", &format!("/sessions/{id}"), None).await;
        (id, before)
    };
    let app = persistent(dir.path());
    let (status, after) = send(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(after, before);
    // the restored session can continue
    let (status, s) = send(
        &app,
        "POST",
        &format!("/sessions/{id}/clarify"),
        Some(json!({ "text": "SITE1, SITE2 and SITE3" })),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(s["state"], "DesignReady");
    let app = persistent(dir.path());
    let (_, list) = send(&app, "GET", "/sessions", None).await;
    assert_eq!(list.as_array().unwrap().len(), 1);
    assert_eq!(list[0]["state"], "DesignReady");
}

#[tokio::test]
async fn concurrent_sessions_are_isolated() {
    let app = app();
    let mut handles = Vec::new();
    for i in 0..8 {
        let app = app.clone();
        handles.push(tokio::spawn(async move {
            let text = if i % 2 == 0 { CASE1 } else { CASE2 };
            create(&app, text).await
        }));
    }
    for (i, h) in handles.into_iter().enumerate() {
        let s = h.await.unwrap();
        let want = if i % 2 == 0 { "DesignReady" } else { "AwaitingClarification" };
        assert_eq!(s["state"], want);
    }
    let (_, health) = send(&app, "GET", "/health", None).await;
    assert_eq!(health["status"], "ok");
    assert_eq!(health["sessions"], 8);
}
