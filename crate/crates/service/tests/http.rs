use std::time::Duration;

use qdesk_core::circuit::{run_all, zero_state};
use qdesk_core::qdsl;
use qdesk_core::state_json::StateJson;
use qdesk_service::{serve_on, ServiceConfig};
use reqwest::{Client, StatusCode};
use serde_json::{json, Value};
use tokio::net::TcpListener;

async fn spawn(config: ServiceConfig) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { serve_on(listener, &config).await.unwrap() });
    format!("http://{addr}")
}

struct Api {
    base: String,
    http: Client,
}

impl Api {
    async fn start() -> Self {
        Self::with(ServiceConfig::default()).await
    }

    async fn with(config: ServiceConfig) -> Self {
        Self {
            base: spawn(config).await,
            http: Client::new(),
        }
    }

    async fn create(&self, body: Value) -> (StatusCode, Value) {
        let r = self
            .http
            .post(format!("{}/sessions", self.base))
            .json(&body)
            .send()
            .await
            .unwrap();
        (r.status(), r.json().await.unwrap())
    }

    async fn step(&self, id: &str, direction: &str) -> (StatusCode, Value) {
        let r = self
            .http
            .post(format!("{}/sessions/{id}/step", self.base))
            .json(&json!({ "direction": direction }))
            .send()
            .await
            .unwrap();
        (r.status(), r.json().await.unwrap())
    }

    async fn state_text(&self, id: &str) -> (StatusCode, String) {
        let r = self
            .http
            .get(format!("{}/sessions/{id}/state", self.base))
            .send()
            .await
            .unwrap();
        (r.status(), r.text().await.unwrap())
    }

    async fn state(&self, id: &str) -> Value {
        let (status, text) = self.state_text(id).await;
        assert_eq!(status, StatusCode::OK, "{text}");
        serde_json::from_str(&text).unwrap()
    }

    async fn restart(&self, id: &str, body: Option<Value>) -> (StatusCode, Value) {
        let mut req = self.http.post(format!("{}/sessions/{id}/restart", self.base));
        if let Some(b) = body {
            req = req.json(&b);
        }
        let r = req.send().await.unwrap();
        (r.status(), r.json().await.unwrap())
    }

    async fn grover(&self, k: usize, target: usize) -> String {
        let (status, body) = self.create(json!({ "grover": { "k": k, "target": target } })).await;
        assert_eq!(status, StatusCode::CREATED, "{body}");
        body["id"].as_str().unwrap().to_string()
    }
}

fn amps(state: &Value) -> Vec<(f64, f64)> {
    state["amplitudes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| (p[0].as_f64().unwrap(), p[1].as_f64().unwrap()))
        .collect()
}

#[tokio::test]
async fn grover_session_layout_and_first_stage() {
    let api = Api::start().await;
    let (status, body) = api.create(json!({ "grover": { "k": 2, "target": 2 } })).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(body["stage_count"], 16);
    assert_eq!(body["qubits"], 3);
    assert_eq!(body["cursor"], 0);
    assert_eq!(body["stage_labels"][4], "oracle");
    assert_eq!(body["grover"], json!({ "k": 2, "target": 2, "iterations": 2 }));
    let id = body["id"].as_str().unwrap();

    let fresh = api.state(id).await;
    assert_eq!(fresh["probabilities"][0], 1.0);
    assert!(fresh["probabilities"].as_array().unwrap()[1..].iter().all(|p| p == 0.0));

    let (status, body) = api.step(id, "forward").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["cursor"], 1);
    let a = amps(&body["state"]);
    for (i, (re, im)) in a.iter().enumerate() {
        let expected = if i == 0 || i == 4 { 0.7071067811865475 } else { 0.0 };
        assert!((re - expected).abs() < 1e-12 && im.abs() < 1e-12, "{i}: {re} {im}");
    }
}

#[tokio::test]
async fn scripted_run_and_byte_identical_return() {
    let api = Api::start().await;
    let id = api.grover(2, 2).await;
    let (_, initial) = api.state_text(&id).await;

    let (status, _) = api.step(&id, "backward").await;
    assert_eq!(status, StatusCode::CONFLICT);

    for _ in 0..10 {
        assert_eq!(api.step(&id, "forward").await.0, StatusCode::OK);
    }
    let s = api.state(&id).await;
    assert_eq!(s["cursor"], 10);
    let p = s["data_probabilities"].as_array().unwrap();
    assert_eq!(p.len(), 4);
    assert!((p[2].as_f64().unwrap() - 1.0).abs() < 1e-9, "{p:?}");

    for _ in 0..10 {
        assert_eq!(api.step(&id, "backward").await.0, StatusCode::OK);
    }
    assert_eq!(api.state_text(&id).await.1, initial);

    for _ in 0..16 {
        api.step(&id, "forward").await;
    }
    let (status, body) = api.step(&id, "forward").await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["kind"], "navigation");
}

#[tokio::test]
async fn rest_trace_equals_in_process_run() {
    let api = Api::start().await;
    let program = "qreg q[3]; H(q); CNOT(q[0], q[2]); SNOT(q[1]); CPHASE(q[2], q[1]); FREDKIN(q[1], q[0], q[2]);";
    let (_, created) = api.create(json!({ "program": program })).await;
    let id = created["id"].as_str().unwrap();
    let c = qdsl::parse(program).unwrap();
    let snaps = run_all(&c, &zero_state(3)).unwrap();
    let expected: Vec<Value> = snaps
        .iter()
        .map(|s| serde_json::to_value(StateJson::from_amplitudes(s.amplitudes())).unwrap())
        .collect();
    assert_eq!(created["state"], expected[0]);
    for want in &expected[1..] {
        let (_, body) = api.step(id, "forward").await;
        assert_eq!(&body["state"], want);
    }
}

#[tokio::test]
async fn program_sessions_and_input_errors() {
    let api = Api::start().await;
    let (status, body) = api.create(json!({ "program": "qreg q[2]; H(q[0]);" })).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(body["stage_count"], 1);
    assert!(body.get("grover").is_none());
    let id = body["id"].as_str().unwrap().to_string();
    assert!(api.state(&id).await.get("data_probabilities").is_none());

    let (status, body) = api.create(json!({ "program": "qreg q[99];" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["kind"], "capacity");
    assert!(body["message"].as_str().unwrap().contains("20"), "{body}");

    let (status, body) = api.create(json!({ "program": "qreg q[2];\nCNOT(q[0]);" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["kind"], "parse");
    assert_eq!(body["span"], json!({ "line": 2, "col": 1, "length": 11 }));

    let (status, body) = api.create(json!({ "program": "qreg q[1]; FOO(q);" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["expected"].as_array().unwrap().contains(&json!("CNOT")));

    let (status, body) = api.create(json!({ "grover": { "k": 2, "target": 7 } })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["kind"], "range");

    let (status, body) = api
        .create(json!({ "grover": { "k": 2, "target": 0, "iterations": 1000000000000u64 } }))
        .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["kind"], "capacity");

    let (status, _) = api.create(json!({ "program": "qreg q[1];", "grover": { "k": 1, "target": 0 } })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = api.create(json!({})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let r = api
        .http
        .post(format!("{}/sessions", api.base))
        .header("content-type", "application/json")
        .body("{not json")
        .send()
        .await
        .unwrap();
    assert_eq!(r.status(), StatusCode::BAD_REQUEST);

    let r = api
        .http
        .post(format!("{}/sessions/{id}/step", api.base))
        .json(&json!({ "direction": "sideways" }))
        .send()
        .await
        .unwrap();
    assert_eq!(r.status(), StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn restart_and_retarget() {
    let api = Api::start().await;
    let id = api.grover(2, 2).await;
    for _ in 0..3 {
        api.step(&id, "forward").await;
    }
    let (status, body) = api.restart(&id, Some(json!({ "grover": { "target": 1 } }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["cursor"], 0);
    assert_eq!(body["stage_labels"].as_array().unwrap().len(), 16);
    assert_eq!(body["stage_labels"][4], "oracle");
    assert_eq!(body["grover"]["target"], 1);
    for _ in 0..10 {
        api.step(&id, "forward").await;
    }
    let p = api.state(&id).await["data_probabilities"].clone();
    assert!((p[1].as_f64().unwrap() - 1.0).abs() < 1e-9, "{p}");

    let (status, body) = api.restart(&id, Some(json!({ "grover": { "target": 9 } }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["kind"], "range");
    assert_eq!(api.state(&id).await["cursor"], 10, "failed retarget leaves the session alone");

    let (status, body) = api.restart(&id, None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["cursor"], 0);

    let (_, created) = api.create(json!({ "program": "qreg q[1]; H(q);" })).await;
    let pid = created["id"].as_str().unwrap();
    api.step(pid, "forward").await;
    let (status, body) = api.restart(pid, None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["state"], created["state"]);
    let (status, _) = api.restart(pid, Some(json!({ "grover": { "target": 0 } }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn unknown_ids_and_delete() {
    let api = Api::start().await;
    assert_eq!(api.state_text("nope").await.0, StatusCode::NOT_FOUND);
    assert_eq!(api.step("nope", "forward").await.0, StatusCode::NOT_FOUND);
    assert_eq!(api.restart("nope", None).await.0, StatusCode::NOT_FOUND);

    let id = api.grover(1, 0).await;
    let url = format!("{}/sessions/{id}", api.base);
    assert_eq!(api.http.delete(&url).send().await.unwrap().status(), StatusCode::NO_CONTENT);
    assert_eq!(api.http.delete(&url).send().await.unwrap().status(), StatusCode::NOT_FOUND);
    assert_eq!(api.state_text(&id).await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn sessions_are_isolated_and_reads_idempotent() {
    let api = Api::start().await;
    let a = api.grover(2, 0).await;
    let b = api.grover(2, 0).await;
    let (_, before) = api.state_text(&b).await;
    for _ in 0..5 {
        api.step(&a, "forward").await;
    }
    api.restart(&a, Some(json!({ "grover": { "target": 3 } }))).await;
    let (_, after) = api.state_text(&b).await;
    assert_eq!(before, after);
    assert_eq!(api.state_text(&b).await.1, after);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_steps_on_one_session_are_serialized() {
    let api = std::sync::Arc::new(Api::start().await);
    let id = api.grover(2, 2).await;
    let tasks: Vec<_> = (0..16)
        .map(|_| {
            let api = api.clone();
            let id = id.clone();
            tokio::spawn(async move { api.step(&id, "forward").await })
        })
        .collect();
    let mut cursors = Vec::new();
    for t in tasks {
        let (status, body) = t.await.unwrap();
        assert_eq!(status, StatusCode::OK);
        cursors.push(body["cursor"].as_u64().unwrap());
    }
    cursors.sort_unstable();
    assert_eq!(cursors, (1..=16).collect::<Vec<_>>());
    assert_eq!(api.step(&id, "forward").await.0, StatusCode::CONFLICT);
}

#[tokio::test]
async fn sessions_expire() {
    let api = Api::with(ServiceConfig {
        ttl: Duration::from_millis(50),
        ..ServiceConfig::default()
    })
    .await;
    let id = api.grover(1, 1).await;
    assert_eq!(api.state_text(&id).await.0, StatusCode::OK);
    tokio::time::sleep(Duration::from_millis(150)).await;
    assert_eq!(api.state_text(&id).await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn cors_for_the_configured_origin() {
    let api = Api::with(ServiceConfig {
        cors_origin: Some("http://localhost:5173".into()),
        ..ServiceConfig::default()
    })
    .await;
    let r = api
        .http
        .request(reqwest::Method::OPTIONS, format!("{}/sessions", api.base))
        .header("origin", "http://localhost:5173")
        .header("access-control-request-method", "POST")
        .header("access-control-request-headers", "content-type")
        .send()
        .await
        .unwrap();
    assert_eq!(
        r.headers()["access-control-allow-origin"],
        "http://localhost:5173"
    );
}
