//! HTTP+JSON API for running sessions, backed by line-delimited logs on
//! disk. Each session is handled by one writer at a time.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex as StdMutex};

use axum::body::Bytes;
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, Request, State};
use axum::http::{HeaderMap, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::Mutex;
use uuid::Uuid;

use crate::elicitation::{
    create_session, Instrument, ParticipantProfile, Phase, Prompt, SessionCondition, SessionError, SessionEvent,
    SessionState,
};
use crate::io::{IoError, SessionHeader, SessionLog, SessionRecord, SCHEMA_VERSION};
use crate::simulator::SyntheticClock;

/// Header carrying the shared token when one is configured.
pub const TOKEN_HEADER: &str = "x-lifesat-token";
pub const DEFAULT_PORT: u16 = 8080;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClockMode {
    Wall,
    /// Event `n` is stamped `epoch + 20 s · (n + 1)`, as in simulations.
    Synthetic { epoch: DateTime<Utc> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceConfig {
    pub port: u16,
    pub data_dir: PathBuf,
    pub instrument: Instrument,
    /// Forces every new session into one condition.
    pub condition_override: Option<SessionCondition>,
    pub token: Option<String>,
    pub clock: ClockMode,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            port: DEFAULT_PORT,
            data_dir: PathBuf::from("data"),
            instrument: Instrument::default(),
            condition_override: None,
            token: None,
            clock: ClockMode::Wall,
        }
    }
}

impl ServiceConfig {
    fn now(&self, seq: usize) -> DateTime<Utc> {
        match self.clock {
            ClockMode::Wall => Utc::now(),
            ClockMode::Synthetic { epoch } => SyntheticClock { epoch }.at(seq),
        }
    }

    fn created(&self) -> DateTime<Utc> {
        match self.clock {
            ClockMode::Wall => Utc::now(),
            ClockMode::Synthetic { epoch } => epoch,
        }
    }
}

/// Machine-readable error returned by every endpoint.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }
    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not-found", format!("no session {id}"))
    }
    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad-request", message)
    }
    fn conflict(message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, "conflict", message)
    }
    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({
            "schema_version": SCHEMA_VERSION,
            "error": { "code": self.code, "message": self.message },
        });
        (self.status, Json(body)).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::InvalidProfile(_) | SessionError::Validation(_) => Self::bad_request(e.to_string()),
            SessionError::SessionComplete | SessionError::Sequencing(_) | SessionError::EmptyHistory => {
                Self::conflict(e.to_string())
            }
        }
    }
}

impl From<IoError> for ApiError {
    fn from(e: IoError) -> Self {
        Self::internal(e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::bad_request(e.body_text())
    }
}

struct Entry {
    state: SessionState,
    created_at: DateTime<Utc>,
    log: PathBuf,
}

struct Inner {
    config: ServiceConfig,
    sessions: StdMutex<HashMap<Uuid, Arc<Mutex<Entry>>>>,
}

/// Shared service state. Cloning is cheap.
#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    /// Opens the data directory and recovers every session log in it.
    pub fn open(config: ServiceConfig) -> Result<Self, IoError> {
        let dir = sessions_dir(&config.data_dir);
        std::fs::create_dir_all(&dir)?;
        let mut sessions = HashMap::new();
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        for path in paths {
            let log = SessionLog::read(&path)?;
            if log.truncated {
                // Rewrite without the partial line so appends stay aligned.
                log.write(&path)?;
                tracing::warn!(path = %path.display(), "dropped a partial trailing event");
            }
            let state = log.to_state()?;
            sessions.insert(
                state.id(),
                Arc::new(Mutex::new(Entry {
                    state,
                    created_at: log.header.created_at,
                    log: path,
                })),
            );
        }
        Ok(Self(Arc::new(Inner {
            config,
            sessions: StdMutex::new(sessions),
        })))
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.0.config
    }

    pub fn session_count(&self) -> usize {
        self.0.sessions.lock().expect("session map poisoned").len()
    }

    fn entry(&self, id: &str) -> Result<Arc<Mutex<Entry>>, ApiError> {
        let uuid = Uuid::parse_str(id).map_err(|_| ApiError::not_found(id))?;
        self.0
            .sessions
            .lock()
            .expect("session map poisoned")
            .get(&uuid)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }
}

fn sessions_dir(data_dir: &Path) -> PathBuf {
    data_dir.join("sessions")
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}/prompt", get(prompt))
        .route("/sessions/{id}/responses", post(respond))
        .route("/sessions/{id}/back", post(back))
        .route("/sessions/{id}/record", get(record))
        .route_layer(middleware::from_fn_with_state(state.clone(), check_token))
        .route("/health", get(health))
        .with_state(state)
}

async fn check_token(State(app): State<AppState>, headers: HeaderMap, req: Request, next: Next) -> Response {
    if let Some(expected) = &app.config().token {
        let given = headers.get(TOKEN_HEADER).and_then(|v| v.to_str().ok());
        if given != Some(expected.as_str()) {
            return ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", "missing or wrong token").into_response();
        }
    }
    next.run(req).await
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "schema_version": SCHEMA_VERSION, "status": "ok" }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateSession {
    pub profile: ParticipantProfile,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub condition: Option<SessionCondition>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Created {
    pub schema_version: u32,
    pub session_id: Uuid,
    pub seed: u64,
    pub condition: SessionCondition,
}

async fn create(
    State(app): State<AppState>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Result<(StatusCode, Json<Created>), ApiError> {
    let Json(req) = body?;
    let cfg = app.config();
    let seed = req.seed.unwrap_or_else(|| rand::thread_rng().next_u64());
    let state = create_session(req.profile, seed, req.condition.or(cfg.condition_override))?;
    let id = state.id();
    let created_at = cfg.created();
    let path = sessions_dir(&cfg.data_dir).join(format!("{id}.jsonl"));
    {
        let mut map = app.0.sessions.lock().expect("session map poisoned");
        if map.contains_key(&id) {
            return Err(ApiError::conflict(format!("session {id} already exists")));
        }
        let log = SessionLog {
            header: SessionHeader {
                schema_version: SCHEMA_VERSION,
                session_id: id,
                seed,
                condition: state.condition(),
                profile: state.profile().clone(),
                created_at,
            },
            entries: Vec::new(),
            truncated: false,
        };
        log.write(&path)?;
        let condition = state.condition();
        map.insert(
            id,
            Arc::new(Mutex::new(Entry {
                state,
                created_at,
                log: path,
            })),
        );
        tracing::info!(%id, ?condition, "session created");
    }
    let entry = app.entry(&id.to_string())?;
    let condition = entry.lock().await.state.condition();
    Ok((
        StatusCode::CREATED,
        Json(Created {
            schema_version: SCHEMA_VERSION,
            session_id: id,
            seed,
            condition,
        }),
    ))
}

/// Current position of a session and what to show next.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptView {
    pub schema_version: u32,
    pub session_id: Uuid,
    pub phase: Phase,
    /// Number of transcript entries so far; echo it back to detect stale
    /// submissions.
    pub seq: usize,
    pub prompt: Option<Prompt>,
}

fn view(app: &AppState, state: &SessionState) -> Result<PromptView, ApiError> {
    let prompt = match state.next_prompt_with(&app.config().instrument) {
        Ok(p) => Some(p),
        Err(SessionError::SessionComplete) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(PromptView {
        schema_version: SCHEMA_VERSION,
        session_id: state.id(),
        phase: state.phase(),
        seq: state.transcript().len(),
        prompt,
    })
}

async fn prompt(State(app): State<AppState>, UrlPath(id): UrlPath<String>) -> Result<Json<PromptView>, ApiError> {
    let entry = app.entry(&id)?;
    let guard = entry.lock().await;
    Ok(Json(view(&app, &guard.state)?))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Submission {
    pub event: SessionEvent,
    /// When given, must equal the current `seq`.
    #[serde(default)]
    pub expected_seq: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BackRequest {
    #[serde(default)]
    pub expected_seq: Option<usize>,
}

async fn apply(app: &AppState, id: &str, event: SessionEvent, expected: Option<usize>) -> Result<PromptView, ApiError> {
    let entry = app.entry(id)?;
    let mut guard = entry.lock().await;
    let seq = guard.state.transcript().len();
    if let Some(e) = expected {
        if e != seq {
            return Err(ApiError::conflict(format!("stale event: expected seq {seq}, got {e}")));
        }
    }
    if matches!(event, SessionEvent::Back) && guard.state.is_done() {
        return Err(SessionError::SessionComplete.into());
    }
    guard.state.apply(event, app.config().now(seq))?;
    let last = guard.state.transcript().last().expect("just applied").clone();
    if let Err(e) = SessionLog::append(&guard.log, &last) {
        // Keep memory and disk in step: rebuild the state without the event.
        let log = SessionLog::read(&guard.log)?;
        guard.state = log.to_state()?;
        return Err(e.into());
    }
    view(app, &guard.state)
}

async fn respond(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<Submission>, JsonRejection>,
) -> Result<Json<PromptView>, ApiError> {
    app.entry(&id)?;
    let Json(sub) = body?;
    if matches!(sub.event, SessionEvent::Back) {
        return Err(ApiError::bad_request("use the back endpoint to revise"));
    }
    Ok(Json(apply(&app, &id, sub.event, sub.expected_seq).await?))
}

async fn back(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Json<PromptView>, ApiError> {
    let expected = if body.iter().all(u8::is_ascii_whitespace) {
        None
    } else {
        serde_json::from_slice::<BackRequest>(&body)
            .map_err(|e| ApiError::bad_request(e.to_string()))?
            .expected_seq
    };
    Ok(Json(apply(&app, &id, SessionEvent::Back, expected).await?))
}

async fn record(State(app): State<AppState>, UrlPath(id): UrlPath<String>) -> Result<Json<SessionRecord>, ApiError> {
    let entry = app.entry(&id)?;
    let guard = entry.lock().await;
    Ok(Json(SessionRecord::from_state(
        &guard.state,
        guard.created_at,
        &app.config().instrument.quality,
    )))
}

/// Binds the configured port and serves until interrupted.
pub async fn serve(config: ServiceConfig) -> anyhow::Result<()> {
    let addr = SocketAddr::from(([0, 0, 0, 0], config.port));
    let state = AppState::open(config)?;
    tracing::info!(%addr, sessions = state.session_count(), "listening");
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use axum::body::Body;
    use axum::http::Request as HttpRequest;
    use http_body_util::BodyExt;
    use tower::ServiceExt;

    use crate::domain::LifeState;
    use crate::elicitation::Response as Choice;
    use crate::simulator::synthetic_profile;

    async fn call(app: &Router, method: &str, uri: &str, body: Option<serde_json::Value>) -> (StatusCode, serde_json::Value) {
        let req = HttpRequest::builder()
            .method(method)
            .uri(uri)
            .header("content-type", "application/json")
            .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
            .unwrap();
        let resp = app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        (status, serde_json::from_slice(&bytes).unwrap_or(serde_json::Value::Null))
    }

    fn config(dir: &Path) -> ServiceConfig {
        ServiceConfig {
            data_dir: dir.to_path_buf(),
            clock: ClockMode::Synthetic {
                epoch: SyntheticClock::default().epoch,
            },
            ..ServiceConfig::default()
        }
    }

    async fn new_session(app: &Router, condition: &str) -> String {
        let (status, body) = call(
            app,
            "POST",
            "/sessions",
            Some(json!({ "profile": synthetic_profile(1), "seed": 5, "condition": condition })),
        )
        .await;
        assert_eq!(status, StatusCode::CREATED);
        assert_eq!(body["schema_version"], SCHEMA_VERSION);
        body["session_id"].as_str().unwrap().to_owned()
    }

    #[tokio::test]
    async fn accept_at_half_gives_top_bracket() {
        let dir = tempfile::tempdir().unwrap();
        let app = router(AppState::open(config(dir.path())).unwrap());
        let id = new_session(&app, "GamblesFirst").await;
        let (status, view) = call(&app, "GET", &format!("/sessions/{id}/prompt"), None).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(view["prompt"]["kind"], "Gamble");
        assert_eq!(view["prompt"]["pictogram"]["denominator"], 2);
        let gamble = view["prompt"]["gamble"].clone();
        let (status, next) = call(
            &app,
            "POST",
            &format!("/sessions/{id}/responses"),
            Some(json!({ "event": { "type": "choice", "gamble": gamble, "ladder_index": 0, "response": Choice::AcceptGamble }, "expected_seq": 0 })),
        )
        .await;
        assert_eq!(status, StatusCode::OK, "{next}");
        assert_eq!(next["seq"], 1);
        let (_, rec) = call(&app, "GET", &format!("/sessions/{id}/record"), None).await;
        assert_eq!(rec["schema_version"], SCHEMA_VERSION);
        assert_eq!(rec["brackets"][0]["bracket"]["highest_accepted"], 0.5);
        assert_eq!(rec["brackets"][0]["bracket"]["lowest_rejected"], 1.0);
    }

    #[tokio::test]
    async fn errors_carry_codes() {
        let dir = tempfile::tempdir().unwrap();
        let app = router(AppState::open(config(dir.path())).unwrap());
        let (status, body) = call(&app, "GET", &format!("/sessions/{}/prompt", Uuid::nil()), None).await;
        assert_eq!(status, StatusCode::NOT_FOUND);
        assert_eq!(body["error"]["code"], "not-found");

        let id = new_session(&app, "LifeSatisfactionFirst").await;
        let (status, body) = call(&app, "POST", &format!("/sessions/{id}/responses"), Some(json!({ "nonsense": 1 }))).await;
        assert_eq!(status, StatusCode::BAD_REQUEST);
        assert_eq!(body["error"]["code"], "bad-request");

        let ls = json!({ "event": { "type": "own_life_satisfaction", "value": 7 }, "expected_seq": 3 });
        let (status, body) = call(&app, "POST", &format!("/sessions/{id}/responses"), Some(ls)).await;
        assert_eq!(status, StatusCode::CONFLICT);
        assert_eq!(body["error"]["code"], "conflict");

        let out_of_range = json!({ "event": { "type": "own_life_satisfaction", "value": 12 } });
        let (status, _) = call(&app, "POST", &format!("/sessions/{id}/responses"), Some(out_of_range)).await;
        assert_eq!(status, StatusCode::BAD_REQUEST);

        let (status, _) = call(&app, "POST", &format!("/sessions/{id}/back"), None).await;
        assert_eq!(status, StatusCode::CONFLICT);

        let g = crate::domain::GambleSpec::adjacent(LifeState::C, crate::domain::Context::Personal, crate::domain::Basis::Letters);
        let wrong_phase = json!({ "event": { "type": "choice", "gamble": g, "ladder_index": 0, "response": Choice::RefuseGamble } });
        let (status, _) = call(&app, "POST", &format!("/sessions/{id}/responses"), Some(wrong_phase)).await;
        assert_eq!(status, StatusCode::CONFLICT);
    }

    #[tokio::test]
    async fn token_is_enforced_when_configured() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ServiceConfig {
            token: Some("s3cret".into()),
            ..config(dir.path())
        };
        let app = router(AppState::open(cfg).unwrap());
        let (status, body) = call(&app, "GET", &format!("/sessions/{}/record", Uuid::nil()), None).await;
        assert_eq!(status, StatusCode::UNAUTHORIZED);
        assert_eq!(body["error"]["code"], "unauthorized");
        let (status, _) = call(&app, "GET", "/health", None).await;
        assert_eq!(status, StatusCode::OK);
        let req = HttpRequest::builder()
            .uri(format!("/sessions/{}/record", Uuid::nil()))
            .header(TOKEN_HEADER, "s3cret")
            .body(Body::empty())
            .unwrap();
        assert_eq!(app.oneshot(req).await.unwrap().status(), StatusCode::NOT_FOUND);
    }

    #[tokio::test]
    async fn sessions_survive_restart() {
        let dir = tempfile::tempdir().unwrap();
        let app = router(AppState::open(config(dir.path())).unwrap());
        let id = new_session(&app, "LifeSatisfactionFirst").await;
        let ls = json!({ "event": { "type": "own_life_satisfaction", "value": 8 } });
        call(&app, "POST", &format!("/sessions/{id}/responses"), Some(ls)).await;
        let (_, before) = call(&app, "GET", &format!("/sessions/{id}/record"), None).await;

        // Simulate a dropped write: a partial line at the end of the log.
        let path = dir.path().join("sessions").join(format!("{id}.jsonl"));
        let mut text = std::fs::read_to_string(&path).unwrap();
        text.push_str("{\"seq\":1,\"at\":");
        std::fs::write(&path, text).unwrap();

        let state = AppState::open(config(dir.path())).unwrap();
        assert_eq!(state.session_count(), 1);
        let app = router(state);
        let (_, after) = call(&app, "GET", &format!("/sessions/{id}/record"), None).await;
        assert_eq!(before, after);
        assert_eq!(after["own_ls"], 8);
    }
}
