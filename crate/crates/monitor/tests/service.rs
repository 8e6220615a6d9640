use std::path::Path;
use std::sync::Arc;

use afhe_core::gate::{EvalPhase, GateHistoryLog, GateVerdict};
use afhe_core::ingest::write_event_log;
use afhe_core::metrics::AlphaEstimate;
use afhe_core::report::series_machine;
use afhe_core::sim::{simulate_operational, DriftPoint};
use afhe_core::{
    builtin_scenario, compute_alpha_windowed, DecisionEvent, EventFilter, EventStore, GateConfig,
    PhaseOutcome, Span, WorkloadSpec,
};
use afhe_monitor::{router, Monitor, ServiceConfig, IDEMPOTENCY_HEADER};
use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

fn log_text(events: &[DecisionEvent]) -> String {
    let mut buf = Vec::new();
    write_event_log(&mut buf, events).unwrap();
    String::from_utf8(buf).unwrap()
}

fn config(store: &Path) -> ServiceConfig {
    ServiceConfig::new(
        store,
        GateConfig::new(0.8).with_monitor(Span::Events(1_000), None, 3),
    )
}

async fn call(monitor: &Arc<Monitor>, req: Request<Body>) -> (StatusCode, String) {
    let resp = router(monitor.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn post(monitor: &Arc<Monitor>, body: String, key: Option<&str>) -> (StatusCode, Value) {
    let mut req = Request::post("/v1/events");
    if let Some(k) = key {
        req = req.header(IDEMPOTENCY_HEADER, k);
    }
    let (status, text) = call(monitor, req.body(Body::from(body)).unwrap()).await;
    (status, serde_json::from_str(&text).unwrap())
}

async fn get(monitor: &Arc<Monitor>, uri: &str) -> (StatusCode, String) {
    call(monitor, Request::get(uri).body(Body::empty()).unwrap()).await
}

fn ops(n: u64, p: f64, seed: u64) -> Vec<DecisionEvent> {
    simulate_operational(&WorkloadSpec::new(p, n, seed)).unwrap()
}

#[tokio::test]
async fn empty_service_serves_empty_series() {
    let dir = tempfile::tempdir().unwrap();
    let monitor = Arc::new(Monitor::open(config(dir.path())).unwrap());
    let (status, body) = get(&monitor, "/v1/healthz").await;
    assert_eq!(status, StatusCode::OK);
    assert!(body.contains("ok"));
    let (status, body) = get(&monitor, "/v1/alpha").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, "{\"windows\":[]}\n");
    let gate: Value = serde_json::from_str(&get(&monitor, "/v1/gate").await.1).unwrap();
    assert_eq!(gate["alert"], Value::Null);
    assert_eq!(gate["total_events"], 0);
}

#[tokio::test]
async fn accepts_valid_lines_and_names_bad_ones() {
    let dir = tempfile::tempdir().unwrap();
    let monitor = Arc::new(Monitor::open(config(dir.path())).unwrap());
    let (status, v) = post(&monitor, log_text(&ops(100, 0.5, 1)), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["accepted"], 100);

    let mut lines: Vec<String> = log_text(&ops(100, 0.5, 2))
        .lines()
        .map(str::to_string)
        .collect();
    let mut broken: Value = serde_json::from_str(&lines[36]).unwrap();
    broken.as_object_mut().unwrap().remove("task_id");
    lines[36] = broken.to_string();
    let (status, v) = post(&monitor, lines.join("\n"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["accepted"], 99);
    assert_eq!(v["rejected"].as_array().unwrap().len(), 1);
    assert_eq!(v["rejected"][0]["line"], 37);
    assert_eq!(v["rejected"][0]["key"], "task_id");
    assert_eq!(v["total_events"], 199);

    let (status, v) = post(&monitor, "not json\n{also not".into(), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"], "syntax_error");
    assert_eq!(
        EventStore::read_events(dir.path(), &EventFilter::default())
            .unwrap()
            .len(),
        199
    );
}

#[tokio::test]
async fn replayed_batch_is_not_double_counted() {
    let dir = tempfile::tempdir().unwrap();
    let monitor = Arc::new(Monitor::open(config(dir.path())).unwrap());
    let body = log_text(&ops(250, 0.7, 3));
    let (_, first) = post(&monitor, body.clone(), Some("batch-a")).await;
    let (_, second) = post(&monitor, body, Some("batch-a")).await;
    assert_eq!(first["accepted"], 250);
    assert_eq!(second["accepted"], 0);
    assert_eq!(second["duplicate"], true);
    assert_eq!(second["total_events"], 250);
}

#[tokio::test]
async fn series_matches_offline_recomputation_and_survives_restart() {
    let dir = tempfile::tempdir().unwrap();
    let spec = builtin_scenario("afhe-final").unwrap();
    let events = simulate_operational(&spec).unwrap();
    let before = {
        let monitor = Arc::new(Monitor::open(config(dir.path())).unwrap());
        for chunk in events.chunks(777) {
            assert_eq!(
                post(&monitor, log_text(chunk), None).await.0,
                StatusCode::OK
            );
        }
        let (_, body) = get(&monitor, "/v1/alpha").await;
        let latest: Value =
            serde_json::from_str(&get(&monitor, "/v1/alpha?windows=1").await.1).unwrap();
        let a = latest["windows"][0]["estimate"]["alpha"].as_f64().unwrap();
        assert!((a - 0.85).abs() <= 0.02, "{a}");
        body
    };
    let stored = EventStore::read_events(dir.path(), &EventFilter::default()).unwrap();
    let offline =
        compute_alpha_windowed::<f64>(&stored, config(dir.path()).gate.window_spec()).unwrap();
    assert_eq!(before, series_machine(&offline) + "\n");

    let monitor = Arc::new(Monitor::open(config(dir.path())).unwrap());
    assert_eq!(get(&monitor, "/v1/alpha").await.1, before);
}

#[tokio::test]
async fn storage_failure_acknowledges_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store");
    let monitor = Arc::new(Monitor::open(config(&store)).unwrap());
    std::fs::remove_dir_all(&store).unwrap();
    let (status, v) = post(&monitor, log_text(&ops(10, 0.5, 4)), None).await;
    assert_eq!(status, StatusCode::INTERNAL_SERVER_ERROR);
    assert_eq!(v["error"], "io_error");
    assert!(v.get("accepted").is_none());
    let (_, body) = get(&monitor, "/v1/alpha").await;
    assert_eq!(body, "{\"windows\":[]}\n");
}

fn deployed_history(path: &Path) {
    let log = GateHistoryLog::new(path);
    let pass = |phase| GateVerdict::judge(phase, AlphaEstimate::from_counts(9, 10).unwrap(), 0.8);
    log.advance(
        PhaseOutcome::Offline {
            verdict: pass(EvalPhase::Offline),
        },
        1,
    )
    .unwrap();
    log.advance(
        PhaseOutcome::Shadow {
            verdict: pass(EvalPhase::Shadow),
        },
        2,
    )
    .unwrap();
}

#[tokio::test]
async fn healthy_stream_stays_deployed() {
    let dir = tempfile::tempdir().unwrap();
    let history = dir.path().join("gate.jsonl");
    deployed_history(&history);
    let mut cfg = config(&dir.path().join("store"));
    cfg.gate_history = Some(history);
    let monitor = Arc::new(Monitor::open(cfg).unwrap());
    post(&monitor, log_text(&ops(5_000, 0.95, 5)), None).await;
    let gate: Value = serde_json::from_str(&get(&monitor, "/v1/gate").await.1).unwrap();
    assert_eq!(gate["state"]["phase"], "deployed");
    assert_eq!(gate["alert"], Value::Null);
}

#[tokio::test]
async fn drift_raises_alert_and_reengineering() {
    let dir = tempfile::tempdir().unwrap();
    let history = dir.path().join("gate.jsonl");
    deployed_history(&history);
    let mut cfg = config(&dir.path().join("store"));
    cfg.gate_history = Some(history.clone());

    let mut spec = WorkloadSpec::new(0.9, 8_000, 6);
    spec.drift = vec![
        DriftPoint {
            at: 0.0,
            autonomy: 0.9,
        },
        DriftPoint {
            at: 0.5,
            autonomy: 0.9,
        },
        DriftPoint {
            at: 0.5,
            autonomy: 0.5,
        },
        DriftPoint {
            at: 1.0,
            autonomy: 0.5,
        },
    ];
    let events = simulate_operational(&spec).unwrap();
    {
        let monitor = Arc::new(Monitor::open(cfg.clone()).unwrap());
        post(&monitor, log_text(&events[..4_000]), None).await;
        let gate: Value = serde_json::from_str(&get(&monitor, "/v1/gate").await.1).unwrap();
        assert_eq!(gate["state"]["phase"], "deployed");

        post(&monitor, log_text(&events[4_000..]), None).await;
        let gate: Value = serde_json::from_str(&get(&monitor, "/v1/gate").await.1).unwrap();
        assert_eq!(gate["state"]["phase"], "reengineering");
        assert_eq!(gate["state"]["reengineering_cycles"], 1);
        let alert = &gate["alert"];
        assert!(alert["alphas"].as_array().unwrap().len() >= 3);
        assert!(alert["alphas"]
            .as_array()
            .unwrap()
            .iter()
            .all(|a| a.as_f64().unwrap() < 0.8));
        assert_eq!(alert["config"]["alpha_target"], 0.8);

        // The alert is exactly the core check over the persisted series.
        let stored = EventStore::read_events(&cfg.store, &EventFilter::default()).unwrap();
        let series = compute_alpha_windowed::<f64>(&stored, cfg.gate.window_spec()).unwrap();
        let trigger = afhe_core::steady_state_check(&series, &cfg.gate).unwrap();
        assert_eq!(alert["first_window"], trigger.first_window);
        assert_eq!(alert["last_window"], trigger.last_window);
    }
    // The transition was persisted once; a restart does not repeat it.
    let monitor = Arc::new(Monitor::open(cfg).unwrap());
    let gate: Value = serde_json::from_str(&get(&monitor, "/v1/gate").await.1).unwrap();
    assert_eq!(gate["state"]["phase"], "reengineering");
    assert_eq!(gate["state"]["reengineering_cycles"], 1);
    assert_eq!(
        GateHistoryLog::new(&history)
            .entries::<f64>()
            .unwrap()
            .len(),
        3
    );
}

#[tokio::test]
async fn concurrent_posts_all_land() {
    let dir = tempfile::tempdir().unwrap();
    let monitor = Arc::new(Monitor::open(config(dir.path())).unwrap());
    let mut handles = Vec::new();
    for k in 0..8u64 {
        let m = monitor.clone();
        let events: Vec<DecisionEvent> = (0..200)
            .map(|i| DecisionEvent::ai_alone(format!("c{k}-{i}"), k * 1_000 + i, "ok"))
            .collect();
        handles.push(tokio::spawn(async move {
            post(&m, log_text(&events), Some(&format!("k{k}"))).await
        }));
        // Readers interleave with writers.
        let m = monitor.clone();
        handles.push(tokio::spawn(async move {
            let (s, _) = get(&m, "/v1/gate").await;
            (s, Value::Null)
        }));
    }
    for h in handles {
        assert_eq!(h.await.unwrap().0, StatusCode::OK);
    }
    assert_eq!(
        EventStore::read_events(dir.path(), &EventFilter::default())
            .unwrap()
            .len(),
        1_600
    );
    let gate: Value = serde_json::from_str(&get(&monitor, "/v1/gate").await.1).unwrap();
    assert_eq!(gate["total_events"], 1_600);
}
