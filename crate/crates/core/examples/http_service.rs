//! Runs the survey API in-process and walks a simulated respondent through
//! it over HTTP requests, printing the first few exchanges.

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use lifesat::elicitation::Prompt;
use lifesat::service::{router, AppState, ServiceConfig};
use lifesat::simulator::{power_utilities, respond, AgentSpec};
use rand::SeedableRng;

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> anyhow::Result<(StatusCode, Value)> {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))?;
    let resp = app.clone().oneshot(req).await?;
    let status = resp.status();
    let bytes = resp.into_body().collect().await?.to_bytes();
    Ok((status, serde_json::from_slice(&bytes).unwrap_or(Value::Null)))
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;
    let app = router(AppState::open(ServiceConfig {
        data_dir: dir.path().to_path_buf(),
        ..ServiceConfig::default()
    })?);

    let agent = AgentSpec::new(power_utilities(0.5), 5);
    let (status, created) = call(&app, "POST", "/sessions", Some(json!({ "profile": agent.profile, "seed": 5 }))).await?;
    println!("POST /sessions -> {status} {created}");
    let id = created["session_id"].as_str().unwrap_or_default().to_owned();

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(agent.seed);
    for step in 0.. {
        let (_, view) = call(&app, "GET", &format!("/sessions/{id}/prompt"), None).await?;
        let Some(prompt) = view.get("prompt").filter(|p| !p.is_null()) else { break };
        let prompt: Prompt = serde_json::from_value(prompt.clone())?;
        let event = respond(&agent, &prompt, &mut rng);
        let body = json!({ "event": event, "expected_seq": view["seq"] });
        let (status, _) = call(&app, "POST", &format!("/sessions/{id}/responses"), Some(body.clone())).await?;
        if step < 4 {
            println!("POST /responses {} -> {status}", body["event"]);
        }
    }

    let (status, stale) = call(
        &app,
        "POST",
        &format!("/sessions/{id}/responses"),
        Some(json!({ "event": { "type": "own_life_satisfaction", "value": 3 }, "expected_seq": 0 })),
    )
    .await?;
    println!("stale submission -> {status} {stale}");

    let (_, record) = call(&app, "GET", &format!("/sessions/{id}/record"), None).await?;
    println!("record: {} events, flags {}", record["transcript"].as_array().map_or(0, Vec::len), record["quality_flags"]);
    Ok(())
}
