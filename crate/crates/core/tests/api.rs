mod common;

use std::io::Write as _;

use axum::http::StatusCode;
use serde_json::json;

use common::{call, replay_over_api, synthetic_app};
use lifesat::estimation::CptConfig;
use lifesat::io::SessionRecord;
use lifesat::simulator::{run_agent, CohortSpec, EngineConfig, Sensitivity, UtilityModel};

fn mixed_agents() -> Vec<lifesat::simulator::AgentSpec> {
    let mut agents = CohortSpec::new(4, 500, UtilityModel::RandomConcave).agents();
    agents.extend(
        CohortSpec {
            sensitivity: Sensitivity::Stochastic { sigma: 15.0 },
            perceptual_weighting: Some(CptConfig::MEDIAN),
            societal_multiplier: 1.5,
            ..CohortSpec::new(4, 600, UtilityModel::Power { exponent: 0.4 })
        }
        .agents(),
    );
    agents
}

#[tokio::test]
async fn simulated_sessions_match_the_engine() {
    let dir = tempfile::tempdir().unwrap();
    let app = synthetic_app(dir.path());
    for agent in mixed_agents() {
        let direct = run_agent(&agent, &EngineConfig::default()).unwrap();
        let state = direct.verify(&Default::default()).unwrap();
        let via_api = replay_over_api(&app, &state).await.unwrap();
        assert_eq!(via_api, direct, "agent {}", agent.seed);
    }
}

#[tokio::test]
async fn finished_sessions_refuse_input() {
    let dir = tempfile::tempdir().unwrap();
    let app = synthetic_app(dir.path());
    let agent = CohortSpec::new(1, 3, UtilityModel::RandomConcave).agents().remove(0);
    let record = run_agent(&agent, &EngineConfig::default()).unwrap();
    let done = replay_over_api(&app, &record.verify(&Default::default()).unwrap()).await.unwrap();
    let id = done.header.session_id;

    let (status, view) = call(&app, "GET", &format!("/sessions/{id}/prompt"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(view["phase"], "Done");
    assert!(view["prompt"].is_null());

    let more = json!({ "event": { "type": "own_life_satisfaction", "value": 5 } });
    let (status, body) = call(&app, "POST", &format!("/sessions/{id}/responses"), Some(more)).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"]["code"], "conflict");
    let (status, _) = call(&app, "POST", &format!("/sessions/{id}/back"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);

    let (_, after) = call(&app, "GET", &format!("/sessions/{id}/record"), None).await;
    let after: SessionRecord = serde_json::from_value(after).unwrap();
    assert_eq!(after, done);
}

#[tokio::test]
async fn back_in_the_responses_body_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let app = synthetic_app(dir.path());
    let profile = lifesat::simulator::synthetic_profile(8);
    let (_, created) = call(&app, "POST", "/sessions", Some(json!({ "profile": profile, "seed": 8 }))).await;
    let id = created["session_id"].as_str().unwrap();
    let (status, body) = call(&app, "POST", &format!("/sessions/{id}/responses"), Some(json!({ "event": { "type": "back" } }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn racing_submissions_apply_once() {
    let dir = tempfile::tempdir().unwrap();
    let app = synthetic_app(dir.path());
    let profile = lifesat::simulator::synthetic_profile(1);
    let (_, created) = call(
        &app,
        "POST",
        "/sessions",
        Some(json!({ "profile": profile, "seed": 1, "condition": "LifeSatisfactionFirst" })),
    )
    .await;
    let id = created["session_id"].as_str().unwrap().to_owned();
    let tasks: Vec<_> = (0..8)
        .map(|_| {
            let app = app.clone();
            let id = id.clone();
            tokio::spawn(async move {
                let ls = json!({ "event": { "type": "own_life_satisfaction", "value": 6 }, "expected_seq": 0 });
                call(&app, "POST", &format!("/sessions/{id}/responses"), Some(ls)).await.0
            })
        })
        .collect();
    let mut statuses = Vec::new();
    for t in tasks {
        statuses.push(t.await.unwrap());
    }
    assert_eq!(statuses.iter().filter(|s| **s == StatusCode::OK).count(), 1);
    assert_eq!(statuses.iter().filter(|s| **s == StatusCode::CONFLICT).count(), 7);
    let (_, view) = call(&app, "GET", &format!("/sessions/{id}/prompt"), None).await;
    assert_eq!(view["seq"], 1);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn parallel_sessions_stay_independent() {
    let dir = tempfile::tempdir().unwrap();
    let app = synthetic_app(dir.path());
    let tasks: Vec<_> = mixed_agents()
        .into_iter()
        .map(|agent| {
            let app = app.clone();
            tokio::spawn(async move {
                let direct = run_agent(&agent, &EngineConfig::default()).unwrap();
                let state = direct.verify(&Default::default()).unwrap();
                (replay_over_api(&app, &state).await.unwrap(), direct)
            })
        })
        .collect();
    for t in tasks {
        let (via_api, direct) = t.await.unwrap();
        assert_eq!(via_api, direct);
    }
}

#[tokio::test]
async fn restart_recovers_sessions_and_drops_a_torn_line() {
    let dir = tempfile::tempdir().unwrap();
    let state = lifesat::simulator::erratic_events(42, &EngineConfig::default().clock).unwrap();
    let before = {
        let app = synthetic_app(dir.path());
        replay_over_api(&app, &state).await.unwrap()
    };
    let log = dir.path().join("sessions").join(format!("{}.jsonl", before.header.session_id));
    let mut f = std::fs::OpenOptions::new().append(true).open(&log).unwrap();
    f.write_all(br#"{"event":{"type":"own_life_sat"#).unwrap();
    drop(f);

    let app = synthetic_app(dir.path());
    let (status, body) = call(&app, "GET", &format!("/sessions/{}/record", before.header.session_id), None).await;
    assert_eq!(status, StatusCode::OK);
    let after: SessionRecord = serde_json::from_value(body).unwrap();
    assert_eq!(after, before);
    let text = std::fs::read_to_string(&log).unwrap();
    assert!(text.ends_with('\n') && !text.contains("own_life_sat\""), "torn line left in place");
}
