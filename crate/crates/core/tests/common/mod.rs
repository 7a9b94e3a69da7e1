#![allow(dead_code)]

use std::path::Path;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use lifesat::elicitation::{SessionEvent, SessionState};
use lifesat::io::SessionRecord;
use lifesat::service::{router, AppState, ClockMode, ServiceConfig};
use lifesat::simulator::SyntheticClock;

pub fn synthetic_app(dir: &Path) -> Router {
    let cfg = ServiceConfig {
        data_dir: dir.to_path_buf(),
        clock: ClockMode::Synthetic {
            epoch: SyntheticClock::default().epoch,
        },
        ..ServiceConfig::default()
    };
    router(AppState::open(cfg).expect("open service state"))
}

pub async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

/// Replays an engine session's transcript through the HTTP API and returns
/// the record the API ends up with.
pub async fn replay_over_api(app: &Router, state: &SessionState) -> Result<SessionRecord, String> {
    let (status, created) = call(
        app,
        "POST",
        "/sessions",
        Some(json!({ "profile": state.profile(), "seed": state.seed(), "condition": state.condition() })),
    )
    .await;
    if status != StatusCode::CREATED {
        return Err(format!("create: {status} {created}"));
    }
    let id = created["session_id"].as_str().ok_or("no session id")?.to_owned();
    for (seq, entry) in state.transcript().iter().enumerate() {
        let (status, body) = match &entry.event {
            SessionEvent::Back => {
                call(app, "POST", &format!("/sessions/{id}/back"), Some(json!({ "expected_seq": seq }))).await
            }
            event => {
                call(
                    app,
                    "POST",
                    &format!("/sessions/{id}/responses"),
                    Some(json!({ "event": event, "expected_seq": seq })),
                )
                .await
            }
        };
        if status != StatusCode::OK {
            return Err(format!("event {seq}: {status} {body}"));
        }
    }
    let (status, body) = call(app, "GET", &format!("/sessions/{id}/record"), None).await;
    if status != StatusCode::OK {
        return Err(format!("record: {status} {body}"));
    }
    serde_json::from_value(body).map_err(|e| e.to_string())
}
