use std::io::Write;
use std::path::Path;
use std::process::{Command, Stdio};

use afhe_cli::run_cli;
use afhe_core::ingest::{canonical_line, write_event_log};
use afhe_core::sim::simulate_operational;
use afhe_core::{builtin_scenario, compute_alpha, DecisionEvent, LaborRole, WorkloadSpec};
use serde_json::Value;

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn run(args: &[&str], stdin: &str) -> Run {
    let mut argv = vec!["afhe"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_cli(argv, &mut stdin.as_bytes(), &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn json(s: &str) -> Value {
    serde_json::from_str(s.trim()).unwrap()
}

fn log_text(events: &[DecisionEvent]) -> String {
    let mut buf = Vec::new();
    write_event_log(&mut buf, events).unwrap();
    String::from_utf8(buf).unwrap()
}

fn write_log(path: &Path, events: &[DecisionEvent]) {
    std::fs::write(path, log_text(events)).unwrap();
}

#[test]
fn alpha_machine_output_is_the_library_value() {
    let events = simulate_operational(&WorkloadSpec::new(0.63, 2_000, 5)).unwrap();
    let r = run(&["alpha", "--format", "machine"], &log_text(&events));
    assert_eq!(r.code, 0, "{}", r.err);
    let expected = canonical_line(&compute_alpha::<f64>(&events).unwrap()) + "\n";
    assert_eq!(r.out, expected);
}

#[test]
fn simulate_pipes_into_alpha_and_regime() {
    let sim = run(
        &["simulate", "--scenario", "legacy-hisoai", "--seed", "42"],
        "",
    );
    assert_eq!(sim.code, 0);
    assert_eq!(sim.out.lines().count(), 10_000);
    let a = run(&["--format", "machine", "alpha"], &sim.out);
    let alpha = json(&a.out)["alpha"].as_f64().unwrap();
    assert!((alpha - 0.38).abs() <= 0.02);
    let r = run(&["--format", "machine", "regime"], &sim.out);
    assert_eq!(json(&r.out)["regime"], "hisoai");
    assert!(run(&["regime"], &sim.out).out.contains("hisoai"));
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        &["simulate", "--scenario", "afhe-final", "--kind", "shadow"][..],
        &[
            "report",
            "--scenario",
            "legacy-hisoai",
            "--format",
            "machine",
        ][..],
        &[
            "gate",
            "offline",
            "--scenario",
            "afhe-final",
            "--target",
            "0.8",
            "--theta",
            "0.8",
        ][..],
    ] {
        let a = run(args, "");
        let b = run(args, "");
        assert_eq!(a.out, b.out);
        assert_eq!(a.code, b.code);
    }
}

#[test]
fn exit_code_tracks_the_verdict_on_every_fixture() {
    for scenario in afhe_core::sim::SCENARIOS {
        for phase in ["offline", "shadow"] {
            let r = run(
                &[
                    "gate",
                    phase,
                    "--scenario",
                    scenario,
                    "--target",
                    "0.8",
                    "--theta",
                    "0.8",
                    "--format",
                    "machine",
                ],
                "",
            );
            let outcome = json(&r.out)["verdict"]["outcome"]
                .as_str()
                .unwrap()
                .to_string();
            assert_eq!(r.code == 1, outcome == "hisoai_flag", "{scenario} {phase}");
            assert!(r.code == 0 || r.code == 1);
        }
    }
}

#[test]
fn iteration_one_is_blocked_offline() {
    let r = run(
        &[
            "gate",
            "offline",
            "--scenario",
            "afhe-iteration-1",
            "--target",
            "0.8",
            "--theta",
            "0.8",
        ],
        "",
    );
    assert_eq!(r.code, 1);
    assert!(r.out.contains("HISOAI FLAG"));
    assert!(
        r.out.contains("0.44") || r.out.contains("0.45"),
        "{}",
        r.out
    );
}

#[test]
fn errors_are_single_json_lines_with_exit_two() {
    let r = run(&["alpha"], "");
    assert_eq!(r.code, 2);
    assert_eq!(r.err.lines().count(), 1);
    assert_eq!(json(&r.err)["error"], "empty_log");

    let bad = "{\"task_id\":\"a\",\"timestamp\":1,\"decider\":\"ai_alone\",\"phase\":\"operational\",\"ai_decision\":\"x\"}\n{\"timestamp\":2,\"decider\":\"ai_alone\",\"phase\":\"operational\"}\n";
    let r = run(&["alpha"], bad);
    assert_eq!(r.code, 2);
    let d = json(&r.err);
    assert_eq!(d["error"], "missing_field");
    assert_eq!(d["line"], 2);
    assert_eq!(d["key"], "task_id");

    let r = run(&["alpha", "--stride", "5"], "");
    assert_eq!(r.code, 2);
    assert_eq!(json(&r.err)["error"], "usage");

    let r = run(
        &[
            "gate",
            "offline",
            "--scenario",
            "afhe-final",
            "--target",
            "0.8",
        ],
        "",
    );
    assert_eq!(r.code, 2);
    assert_eq!(json(&r.err)["error"], "missing_theta");

    let r = run(&["simulate", "--scenario", "nope"], "");
    assert_eq!(json(&r.err)["error"], "unknown_scenario");

    assert_eq!(run(&["--help"], "").code, 0);
}

#[test]
fn windowed_alpha_single_window_matches_batch() {
    let events = simulate_operational(&WorkloadSpec::new(0.5, 3_000, 9)).unwrap();
    let text = log_text(&events);
    let batch = json(&run(&["--format", "machine", "alpha"], &text).out);
    let windowed = json(&run(&["--format", "machine", "alpha", "--window", "3000"], &text).out);
    assert_eq!(windowed["windows"].as_array().unwrap().len(), 1);
    assert_eq!(windowed["windows"][0]["estimate"], batch);
}

#[test]
fn ingest_then_read_from_store() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store");
    let store_s = store.to_str().unwrap();
    let log = dir.path().join("ops.jsonl");
    let events = simulate_operational(&WorkloadSpec::new(0.7, 1_500, 4)).unwrap();
    write_log(&log, &events);

    let r = run(
        &[
            "--format",
            "machine",
            "ingest",
            log.to_str().unwrap(),
            "--store",
            store_s,
            "--idempotency-key",
            "k1",
        ],
        "",
    );
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(json(&r.out)["appended"], 1_500);
    let again = run(
        &[
            "--format",
            "machine",
            "ingest",
            log.to_str().unwrap(),
            "--store",
            store_s,
            "--idempotency-key",
            "k1",
        ],
        "",
    );
    assert_eq!(json(&again.out)["duplicate"], true);
    assert_eq!(json(&again.out)["total_events"], 1_500);

    let from_store = run(
        &[
            "--format", "machine", "alpha", "--store", store_s, "--window", "500",
        ],
        "",
    );
    let from_file = run(
        &[
            "--format",
            "machine",
            "alpha",
            log.to_str().unwrap(),
            "--window",
            "500",
        ],
        "",
    );
    assert_eq!(from_store.out, from_file.out);
}

#[test]
fn cost_from_flags_and_scenario_agree() {
    let a = run(
        &[
            "--format",
            "machine",
            "cost",
            "--tau-a",
            "1",
            "--tau-h",
            "30",
            "--gamma",
            "0",
            "--tau-review",
            "2",
            "--alpha",
            "0.38",
            "--n",
            "100",
        ],
        "",
    );
    let b = run(
        &[
            "--format",
            "machine",
            "cost",
            "--scenario",
            "legacy-hisoai",
            "--alpha",
            "0.38",
            "--n",
            "100",
        ],
        "",
    );
    assert_eq!(a.out, b.out);
    let v = json(&a.out);
    assert!((v["total"].as_f64().unwrap() - 1960.0).abs() < 1e-9);
    assert!(v["human_share"].as_f64().unwrap() > 0.9);
    let r = run(&["cost", "--alpha", "0.5"], "");
    assert_eq!(r.code, 2);
}

#[test]
fn labor_report_counts_tags() {
    let mut events = Vec::new();
    for i in 0..100u64 {
        let role = if i < 90 {
            LaborRole::Substitution
        } else {
            LaborRole::StrategicTuning
        };
        events.push(DecisionEvent::human_only(format!("h{i}"), i, "x").with_role(role));
    }
    events.push(DecisionEvent::human_only("untagged", 500, "x"));
    let r = run(&["--format", "machine", "labor"], &log_text(&events));
    let v = json(&r.out);
    assert_eq!(v["shares"]["substitution"], 0.9);
    assert_eq!(v["counts"]["strategic_tuning"], 10);
    assert_eq!(v["untagged_human_involved"], 1);
}

#[test]
fn full_gate_lifecycle_through_history() {
    let dir = tempfile::tempdir().unwrap();
    let history = dir.path().join("gate.jsonl");
    let h = history.to_str().unwrap();
    let gate = |args: &[&str], at: &str| {
        let mut v = vec!["gate"];
        v.extend_from_slice(args);
        v.extend_from_slice(&[
            "--target",
            "0.8",
            "--theta",
            "0.8",
            "--history",
            h,
            "--at",
            at,
        ]);
        run(&v, "")
    };
    assert_eq!(
        gate(&["offline", "--scenario", "afhe-iteration-1"], "1").code,
        1
    );
    assert_eq!(
        run(&["gate", "resume", "--history", h, "--at", "2"], "").code,
        0
    );
    assert_eq!(gate(&["offline", "--scenario", "afhe-final"], "3").code, 0);
    let shadow = gate(
        &[
            "shadow",
            "--scenario",
            "afhe-final",
            "--shadow-cycles",
            "10000",
        ],
        "4",
    );
    assert_eq!(shadow.code, 0, "{}", shadow.err);

    let status = json(
        &run(
            &["--format", "machine", "gate", "status", "--history", h],
            "",
        )
        .out,
    );
    assert_eq!(status["phase"], "deployed");
    assert_eq!(status["reengineering_cycles"], 1);
    assert_eq!(status["history"].as_array().unwrap().len(), 4);

    // Out-of-phase outcome is rejected and leaves the file alone.
    let r = run(&["gate", "resume", "--history", h, "--at", "5"], "");
    assert_eq!(r.code, 2);
    assert_eq!(json(&r.err)["error"], "illegal_transition");

    // Healthy operations keep the deployment.
    let healthy = gate(&["monitor", "--scenario", "afhe-final"], "6");
    assert_eq!(healthy.code, 0, "{}", healthy.err);

    // A drifting stream triggers re-engineering.
    let mut spec = builtin_scenario("afhe-final").unwrap();
    spec.drift = vec![
        afhe_core::sim::DriftPoint {
            at: 0.0,
            autonomy: 0.85,
        },
        afhe_core::sim::DriftPoint {
            at: 0.5,
            autonomy: 0.85,
        },
        afhe_core::sim::DriftPoint {
            at: 0.6,
            autonomy: 0.4,
        },
        afhe_core::sim::DriftPoint {
            at: 1.0,
            autonomy: 0.4,
        },
    ];
    let log = dir.path().join("drift.jsonl");
    write_log(&log, &simulate_operational(&spec).unwrap());
    let mut v = vec![
        "--format",
        "machine",
        "gate",
        "monitor",
        log.to_str().unwrap(),
    ];
    v.extend_from_slice(&["--target", "0.8", "--history", h, "--at", "7"]);
    let r = run(&v, "");
    assert_eq!(r.code, 1, "{}", r.err);
    let m = json(&r.out);
    assert_eq!(m["state"]["phase"], "reengineering");
    assert!(m["trigger"]["alphas"]
        .as_array()
        .unwrap()
        .iter()
        .all(|a| a.as_f64().unwrap() < 0.8));
    let status = json(
        &run(
            &["--format", "machine", "gate", "status", "--history", h],
            "",
        )
        .out,
    );
    assert_eq!(status["reengineering_cycles"], 2);
}

#[test]
fn binary_reads_store_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store");
    let bin = env!("CARGO_BIN_EXE_afhe");
    let sim = Command::new(bin)
        .args([
            "simulate",
            "--scenario",
            "legacy-hisoai",
            "--n-tasks",
            "2000",
        ])
        .env_remove("AFHE_STORE")
        .output()
        .unwrap();
    assert!(sim.status.success());

    let mut child = Command::new(bin)
        .args(["ingest"])
        .env("AFHE_STORE", &store)
        .stdin(Stdio::piped())
        .stdout(Stdio::null())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(&sim.stdout).unwrap();
    assert!(child.wait().unwrap().success());

    let via_env = Command::new(bin)
        .args(["--format", "machine", "alpha"])
        .env("AFHE_STORE", &store)
        .output()
        .unwrap();
    let mut child = Command::new(bin)
        .args(["--format", "machine", "alpha", "-"])
        .env("AFHE_STORE", &store)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(&sim.stdout).unwrap();
    let via_stdin = child.wait_with_output().unwrap();
    assert_eq!(via_env.stdout, via_stdin.stdout);
    assert!(!via_env.stdout.is_empty());

    // `simulate | head` closes the pipe early; that is not an error.
    let mut child = Command::new(bin)
        .args(["simulate", "--scenario", "legacy-hisoai"])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    drop(child.stdout.take());
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stderr.is_empty());
}
