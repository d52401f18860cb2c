use std::path::Path;
use std::process::{Command, Output};

fn hc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperconsensus"))
        .args(args)
        .env("HYPERCONSENSUS_WORKERS", "1")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn generate(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name).to_str().unwrap().to_string();
    let mut full = vec!["generate"];
    full.extend_from_slice(args);
    full.extend(["-o", &path]);
    assert!(hc(&full).status.success());
    path
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let k4 = generate(dir.path(), "k4.hg", &["complete-p2p", "--n", "4"]);
    let k3 = generate(dir.path(), "k3.hg", &["complete-p2p", "--n", "3"]);
    assert_eq!(hc(&["check", &k4, "--f", "1"]).status.code(), Some(0));
    let violated = hc(&["check", &k3, "--f", "1"]);
    assert_eq!(violated.status.code(), Some(2));
    assert!(stdout(&violated).contains("witness F = "));
    assert_eq!(hc(&["check", &k3, "--f", "1", "--condition", "ab"]).status.code(), Some(2));
    assert_eq!(hc(&["check", &k4, "--f", "1", "--condition", "ab"]).status.code(), Some(0));

    let bad = dir.path().join("bad.hg");
    std::fs::write(&bad, "hypergraph n=3\nedge 0 0 -> 1\nedge 1 oops\n").unwrap();
    let out = hc(&["check", bad.to_str().unwrap(), "--f", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    assert_eq!(hc(&["check", "/nonexistent/topology.hg", "--f", "1"]).status.code(), Some(1));
}

#[test]
fn check_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let c4 = generate(dir.path(), "c4.hg", &["cycle-local-broadcast", "--n", "4"]);
    let out = hc(&["--json", "check", &c4, "--f", "1"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["holds"], true);
    assert_eq!(doc["condition"], "lcr_hyper");
    let p3 = generate(dir.path(), "p3.hg", &["path-local-broadcast", "--n", "3"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&hc(&["--json", "check", &p3, "--f", "1"]))).unwrap();
    assert_eq!(doc["holds"], false);
    assert!(doc["witness"]["partition"].is_object());
}

#[test]
fn generated_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let kinds: [&[&str]; 7] = [
        &["complete-p2p", "--n", "4"],
        &["cycle-local-broadcast", "--n", "5"],
        &["path-local-broadcast", "--n", "3"],
        &["figure1a"],
        &["figure1b"],
        &["counterexample", "--f", "3"],
        &["random", "--n", "5", "--edges", "7", "--seed", "11"],
    ];
    for (i, args) in kinds.iter().enumerate() {
        let path = generate(dir.path(), &format!("g{i}.hg"), args);
        let text = std::fs::read_to_string(&path).unwrap();
        let g = hyperconsensus::format::parse(&text).unwrap();
        assert_eq!(hyperconsensus::format::serialize(&g), text, "{args:?}");
    }
    let k4 = std::fs::read_to_string(dir.path().join("g0.hg")).unwrap();
    assert_eq!(k4.lines().filter(|l| l.starts_with("edge ")).count(), 12);
    let ce = std::fs::read_to_string(dir.path().join("g5.hg")).unwrap();
    assert!(ce.starts_with("hypergraph n=8"));
    let again = generate(dir.path(), "again.hg", &["random", "--n", "5", "--edges", "7", "--seed", "11"]);
    assert_eq!(std::fs::read_to_string(again).unwrap(), std::fs::read_to_string(dir.path().join("g6.hg")).unwrap());
}

#[test]
fn union_combines_channels() {
    let dir = tempfile::tempdir().unwrap();
    let a = generate(dir.path(), "a.hg", &["cycle-local-broadcast", "--n", "4"]);
    let b = generate(dir.path(), "b.hg", &["complete-p2p", "--n", "4"]);
    let out = hc(&["generate", "union", &a, &b]);
    assert!(out.status.success());
    let g = hyperconsensus::format::parse(&stdout(&out)).unwrap();
    assert_eq!(g.edges().len(), 4 + 12);
    assert_eq!(g.head_edges(0).unwrap().len(), 1 + 3);
}

fn write_scenario(dir: &Path, graph: &str, inputs: &str, faulty: &str, seed: u64) -> String {
    let path = dir.join(format!("scenario-{seed}.json"));
    let doc = format!(
        r#"{{"graph": {graph}, "f": 1, "faulty": {faulty}, "inputs": {inputs}, "adversary": {{"kind": "split_persona"}}, "seed": {seed}}}"#
    );
    std::fs::write(&path, doc).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn simulate_k4_sweep_passes() {
    let dir = tempfile::tempdir().unwrap();
    let k4 = hyperconsensus::format::serialize(&hyperconsensus::fixtures::complete_p2p(4).unwrap());
    let s = write_scenario(dir.path(), &serde_json::to_string(&k4).unwrap(), r#"{"0":0,"1":1,"2":0,"3":1}"#, "[2]", 1);
    let out = hc(&["--json", "simulate", &s, "--sweep", "all"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["runs"], doc["passed"]);
    assert_eq!(doc["lemma_violation_runs"], 0);

    let single = hc(&["simulate", &s]);
    assert_eq!(single.status.code(), Some(0));
    let text = stdout(&single);
    assert!(text.contains("agreement: true") && text.contains("validity: true"));
}

#[test]
fn simulate_flags_aborted_phases() {
    let dir = tempfile::tempdir().unwrap();
    let graph = r#"{"n": 3, "edges": [{"id": 0, "head": 0, "tails": [1]}]}"#;
    let s = write_scenario(dir.path(), graph, r#"{"0":0,"1":1,"2":1}"#, "[]", 1);
    let out = hc(&["--json", "simulate", &s, "--sweep", "faulty-sets"]);
    assert_eq!(out.status.code(), Some(2));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(doc["runs_with_aborted_phases"].as_u64().unwrap() > 0);
}

#[test]
fn seed_does_not_change_deterministic_reports() {
    let dir = tempfile::tempdir().unwrap();
    let c4 = hyperconsensus::format::serialize(&hyperconsensus::fixtures::cycle_local_broadcast(4).unwrap());
    let s = write_scenario(dir.path(), &serde_json::to_string(&c4).unwrap(), r#"{"0":1,"1":0,"2":0,"3":1}"#, "[1]", 5);
    let a = hc(&["--json", "simulate", &s, "--sweep", "inputs"]);
    let b = hc(&["--json", "simulate", &s, "--sweep", "inputs", "--seed", "99"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), Some(0));
}

#[test]
fn simulate_rejects_invalid_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let graph = r#"{"n": 2, "edges": [{"id": 0, "head": 0, "tails": [1]}]}"#;
    let s = write_scenario(dir.path(), graph, r#"{"0":0}"#, "[]", 1);
    assert_eq!(hc(&["simulate", &s]).status.code(), Some(1));
    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{").unwrap();
    assert_eq!(hc(&["simulate", garbage.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn crossval_reports_no_disagreement() {
    let out = hc(&["crossval", "--class", "p2p", "--n-max", "3", "--f", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("disagreements: 0"));
    let json = hc(&["--json", "crossval", "--class", "local", "--n-max", "4", "--f", "1"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(doc["disagreements"], 0);
    assert_eq!(hc(&["crossval", "--class", "p2p", "--n-max", "9", "--f", "1"]).status.code(), Some(1));
}
