use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dpdp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpdp")).args(args).output().expect("run dpdp")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn generate(dir: &Path, name: &str, orders: &str) -> std::path::PathBuf {
    let out = dir.join(name);
    let o = dpdp(&["generate", "--out", p(&out), "--seed", "21", "--orders", orders, "--vehicles", "5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn simulate(inst: &Path, dir: &Path, tag: &str, extra: &[&str]) -> (i32, Value, Vec<u8>) {
    let report = dir.join(format!("{tag}.json"));
    let log = dir.join(format!("{tag}.jsonl"));
    let mut args = vec!["simulate", "--instance", p(inst), "--report", p(&report), "--log", p(&log)];
    args.extend_from_slice(extra);
    let out = dpdp(&args);
    (code(&out), json(&report), std::fs::read(&log).unwrap_or_default())
}

#[test]
fn generate_is_deterministic_and_rejects_empty_instances() {
    let dir = tempfile::tempdir().unwrap();
    let a = generate(dir.path(), "a", "20");
    let b = generate(dir.path(), "b", "20");
    for file in ["orders.csv", "vehicles.csv", "route_map.csv", "factory_info.csv"] {
        assert_eq!(std::fs::read(a.join(file)).unwrap(), std::fs::read(b.join(file)).unwrap(), "{file}");
    }
    let out = dpdp(&["generate", "--out", p(&dir.path().join("c")), "--orders", "0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn simulate_then_score_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "inst", "50");
    let (status, report, _) = simulate(&inst, dir.path(), "run", &["--policy", "greedy"]);
    assert_eq!(status, 0);
    assert_eq!(report["status"], "FINISHED");
    assert_eq!(report["score"]["orders_completed"], 50);

    let log = dir.path().join("run.jsonl");
    let scored = dir.path().join("scored.json");
    let out = dpdp(&[
        "score",
        "--instance",
        p(&inst),
        "--log",
        p(&log),
        "--report",
        p(&dir.path().join("run.json")),
        "--out",
        p(&scored),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&scored), report["score"]);

    let relaxed = dir.path().join("relaxed.json");
    let out = dpdp(&["score", "--instance", p(&inst), "--log", p(&log), "--lambda", "1", "--out", p(&relaxed)]);
    assert_eq!(code(&out), 0);
    let relaxed = json(&relaxed);
    assert_eq!(relaxed["f1"], report["score"]["f1"]);
    assert_eq!(relaxed["f2"], report["score"]["f2"]);
    if report["score"]["f1"] != 0 {
        assert_ne!(relaxed["f"], report["score"]["f"]);
    }

    // Dropping a delivery makes the log inconsistent with the instance.
    let text = std::fs::read_to_string(&log).unwrap();
    let cut = text.lines().position(|l| l.contains("ITEM_DELIVERED")).unwrap();
    let tampered: String = text.lines().enumerate().filter(|(k, _)| *k != cut).map(|(_, l)| format!("{l}\n")).collect();
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, tampered).unwrap();
    let out = dpdp(&["score", "--instance", p(&inst), "--log", p(&bad)]);
    assert_ne!(code(&out), 0);
}

#[test]
fn idle_policy_hits_the_deadline() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "inst", "10");
    let (status, report, _) = simulate(&inst, dir.path(), "idle", &["--policy", "idle"]);
    assert_eq!(status, 10);
    assert_eq!(report["status"], "DISPATCH_DEADLINE");
}

#[cfg(unix)]
#[test]
fn external_violation_is_reported() {
    if Command::new("python3").arg("--version").output().is_err() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "inst", "10");
    // Picks up one item and never delivers it.
    let script = dir.path().join("stub.py");
    std::fs::write(
        &script,
        r#"import json, os
d = os.environ["DPDP_INTERACTION_DIR"]
items = json.load(open(os.path.join(d, "unallocated_order_items.json")))
vehicles = json.load(open(os.path.join(d, "vehicle_info.json")))
dest = {}
if items:
    i = items[0]
    dest[vehicles[0]["id"]] = {"factory_id": i["pickup_factory_id"], "lng": 0.0, "lat": 0.0,
        "delivery_item_list": [], "pickup_item_list": [i["id"]], "arrive_time": 0, "leave_time": 0}
json.dump(dest, open(os.path.join(d, "output_destination.json"), "w"))
json.dump({}, open(os.path.join(d, "output_route.json"), "w"))
print("SUCCESS")
"#,
    )
    .unwrap();
    let io = dir.path().join("io");
    let (status, report, _) = simulate(&inst, dir.path(), "stub", &["--dir", p(&io), "--", "python3", p(&script)]);
    assert_eq!(status, 12);
    assert_eq!(report["status"], "VALIDATION");
    let violations = &report["outcome"]["violations"];
    assert!(violations.as_array().is_some_and(|v| !v.is_empty()), "{report}");
}

#[test]
fn persistent_and_fresh_external_runs_match_embedded() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "inst", "25");
    let (_, _, embedded) = simulate(&inst, dir.path(), "embedded", &["--policy", "threshold"]);
    let bin = env!("CARGO_BIN_EXE_dpdp");
    for (tag, mode, flag) in [("fresh", "fresh", None), ("persistent", "persistent", Some("--persistent"))] {
        let io = dir.path().join(tag);
        let mut args = vec!["--dir", p(&io), "--mode", mode, "--", bin, "algorithm", "--instance", p(&inst), "--policy", "threshold"];
        args.extend(flag);
        let (status, _, log) = simulate(&inst, dir.path(), tag, &args);
        assert_eq!(status, 0, "{tag}");
        assert_eq!(log, embedded, "{tag}");
    }
}

#[test]
fn validate_checks_an_interaction_directory() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "inst", "10");
    let io = dir.path().join("io");
    let bin = env!("CARGO_BIN_EXE_dpdp");
    // Stop the run at successively later epochs until the last round's
    // documents hold a stop with pickups.
    let found = (1..40).map(|n| n.to_string()).find_map(|epochs| {
        let args = ["--dir", p(&io), "--max-epochs", &epochs, "--", bin, "algorithm", "--instance", p(&inst)];
        simulate(&inst, dir.path(), "run", &args);
        let docs = json(&io.join("output_destination.json"));
        let hit = docs.as_object().unwrap().iter().find(|(_, s)| s["pickup_item_list"].as_array().is_some_and(|l| !l.is_empty()));
        hit.map(|(k, v)| (docs.clone(), k.clone(), v.clone()))
    });
    let (mut docs, vehicle, stop) = found.expect("some round dispatches a pickup");
    let out = dpdp(&["validate", "--instance", p(&inst), "--dir", p(&io)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let route = io.join("output_route.json");
    // Deliver the destination's pickups before loading them.
    let mut early = stop.clone();
    early["delivery_item_list"] = stop["pickup_item_list"].clone();
    early["pickup_item_list"] = Value::Array(vec![]);
    docs[&vehicle] = early;
    std::fs::write(io.join("output_destination.json"), docs.to_string()).unwrap();
    std::fs::write(&route, "{}").unwrap();
    let out = dpdp(&["validate", "--instance", p(&inst), "--dir", p(&io)]);
    assert_eq!(code(&out), 12, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn bench_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = dpdp(&["bench", "--generate", "3", "--orders", "15", "--policies", "greedy,threshold", "--out", p(&out)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read_to_string(out).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    assert_eq!(a.lines().count(), 1 + 6 + 2);
}
