//! HTTP API over [`SessionManager`]. Pipeline work runs on the blocking
//! pool; the async side only routes.

use std::sync::Arc;

use axum::extract::{Path, State as AxumState};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use lightpath_core::design::to_markdown;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use uuid::Uuid;

use crate::manager::{ManagerError, SessionManager};
use crate::session::{HistoryEntry, Payload, Session, Stage, State};

type Shared = Arc<SessionManager>;

#[derive(Debug, Deserialize)]
pub struct TextBody {
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClarificationView {
    pub hint: String,
    pub error_kind: String,
    pub offending_token: String,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: Stage,
    pub duration_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: Uuid,
    pub state: State,
    pub text: String,
    pub clarifications: Vec<String>,
    pub retry_count: u32,
    pub clarification: Option<ClarificationView>,
    pub failure: Option<String>,
    /// Artifact endpoints that currently have content.
    pub artifacts: Vec<String>,
    pub timings: Vec<StageTiming>,
    pub history: Vec<HistoryEntry>,
}

impl From<&Session> for SessionView {
    fn from(s: &Session) -> Self {
        let a = &s.artifacts;
        let mut artifacts = Vec::new();
        for (present, name) in [
            (a.intent.is_some(), "intent"),
            (a.enriched.is_some(), "guidance"),
            (a.feasibility.is_some(), "feasibility"),
            (a.plan.is_some(), "plan"),
            (a.design.is_some() || a.degraded.is_some(), "design"),
        ] {
            if present {
                artifacts.push(name.to_owned());
            }
        }
        let failure = match s.history.last().map(|e| &e.payload) {
            Some(Payload::Failed { cause, .. }) => Some(cause.clone()),
            _ => None,
        };
        SessionView {
            session_id: s.id,
            state: s.state,
            text: s.text.clone(),
            clarifications: s.clarifications.clone(),
            retry_count: s.retry_count,
            clarification: s.pending.as_ref().map(|d| ClarificationView {
                hint: d.hint.clone(),
                error_kind: d.source_error.kind.as_str().to_owned(),
                offending_token: d.source_error.offending_token.clone(),
                position: d.source_error.position,
            }),
            failure,
            artifacts,
            timings: s
                .stage_timings()
                .into_iter()
                .map(|(stage, duration_ms)| StageTiming { stage, duration_ms })
                .collect(),
            history: s.history_entries(),
        }
    }
}

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<ManagerError> for ApiError {
    fn from(e: ManagerError) -> Self {
        let status = match &e {
            ManagerError::NotFound(_) => StatusCode::NOT_FOUND,
            ManagerError::Conflict(_) => StatusCode::CONFLICT,
            ManagerError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ManagerError::Store(_) | ManagerError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

fn parse_id(raw: &str) -> Result<Uuid, ApiError> {
    // an id that cannot exist is simply not found
    Uuid::parse_str(raw).map_err(|_| ApiError(StatusCode::NOT_FOUND, format!("no session {raw}")))
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ManagerError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map_err(ApiError::from)
}

async fn health(AxumState(m): AxumState<Shared>) -> Json<Value> {
    Json(json!({
        "status": "ok",
        "sessions": m.len(),
        "gateway": m.engine().gateway().describe(),
    }))
}

async fn create(AxumState(m): AxumState<Shared>, Json(body): Json<TextBody>) -> Result<Response, ApiError> {
    let s = blocking(move || m.create(&body.text)).await?;
    Ok((StatusCode::CREATED, Json(SessionView::from(&s))).into_response())
}

async fn list(AxumState(m): AxumState<Shared>) -> Result<Json<Value>, ApiError> {
    let mut out = Vec::new();
    for id in m.ids() {
        let s = m.get(id)?;
        out.push(json!({ "session_id": s.id, "state": s.state, "created_at": s.created_at }));
    }
    Ok(Json(Value::Array(out)))
}

async fn show(AxumState(m): AxumState<Shared>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    let s = m.get(parse_id(&id)?)?;
    Ok(Json(SessionView::from(&s)))
}

async fn clarify(
    AxumState(m): AxumState<Shared>,
    Path(id): Path<String>,
    Json(body): Json<TextBody>,
) -> Result<Json<SessionView>, ApiError> {
    let id = parse_id(&id)?;
    let s = blocking(move || m.clarify(id, &body.text)).await?;
    Ok(Json(SessionView::from(&s)))
}

async fn advance(AxumState(m): AxumState<Shared>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    let id = parse_id(&id)?;
    let s = blocking(move || m.advance(id)).await?;
    Ok(Json(SessionView::from(&s)))
}

fn artifact(s: &Session, name: &str) -> Result<Value, ApiError> {
    let a = &s.artifacts;
    let value = match name {
        "intent" => a.intent.as_ref().map(serde_json::to_value),
        "guidance" => a.enriched.as_ref().map(serde_json::to_value),
        "feasibility" => a.feasibility.as_ref().map(serde_json::to_value),
        "plan" => a.plan.as_ref().map(|p| {
            serde_json::to_value(json!({
                "plan": p,
                "validation": a.validation,
                "problem": a.problem,
            }))
        }),
        "design" => match (&a.design, &a.degraded) {
            (Some(d), _) => Some(serde_json::to_value(d)),
            (None, Some(d)) => Some(serde_json::to_value(d)),
            _ => None,
        },
        _ => None,
    };
    match value {
        Some(v) => v.map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())),
        None => Err(ApiError(
            StatusCode::NOT_FOUND,
            format!("session {} has no {name} yet (state {:?})", s.id, s.state),
        )),
    }
}

macro_rules! artifact_route {
    ($fn_name:ident, $name:literal) => {
        async fn $fn_name(AxumState(m): AxumState<Shared>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
            let s = m.get(parse_id(&id)?)?;
            artifact(&s, $name).map(Json)
        }
    };
}

artifact_route!(intent, "intent");
artifact_route!(guidance, "guidance");
artifact_route!(feasibility, "feasibility");
artifact_route!(plan, "plan");
artifact_route!(design, "design");

async fn report(AxumState(m): AxumState<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let s = m.get(parse_id(&id)?)?;
    let text = match (&s.artifacts.design, &s.artifacts.degraded) {
        (Some(d), _) => to_markdown(d),
        (None, Some(d)) => d.to_markdown(),
        _ => {
            return Err(ApiError(
                StatusCode::NOT_FOUND,
                format!("session {} has no design yet", s.id),
            ))
        }
    };
    Ok(([(header::CONTENT_TYPE, "text/markdown; charset=utf-8")], text).into_response())
}

pub fn router(manager: Shared) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/intents", post(create))
        .route("/sessions", get(list))
        .route("/sessions/{id}", get(show))
        .route("/sessions/{id}/clarify", post(clarify))
        .route("/sessions/{id}/advance", post(advance))
        .route("/sessions/{id}/intent", get(intent))
        .route("/sessions/{id}/guidance", get(guidance))
        .route("/sessions/{id}/feasibility", get(feasibility))
        .route("/sessions/{id}/plan", get(plan))
        .route("/sessions/{id}/design", get(design))
        .route("/sessions/{id}/report", get(report))
        .with_state(manager)
}

/// Serves until Ctrl-C.
pub async fn serve(listener: tokio::net::TcpListener, manager: Shared) -> std::io::Result<()> {
    axum::serve(listener, router(manager))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
