use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lidar_cfe::model::{Network, NetworkSpec};

const CLI: &str = env!("CARGO_BIN_EXE_lidar-cfe");
const BRIDGE: &str = env!("CARGO_BIN_EXE_bridge-ref");

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    Command::new(CLI).args(args).env("RUST_LOG", "error").output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn scan_writes_json_and_plot_for_every_config_scenario() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["empty_room", "four_walls", "corridor", "forward_box"] {
        let o = run(&["scan", s(&configs().join(format!("{name}.toml"))), "--out", s(dir.path())]);
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(format!("{name}.scan.json"))).unwrap()).unwrap();
        assert_eq!(json["readings"].as_array().unwrap().len(), 180);
        assert!(std::fs::read_to_string(dir.path().join(format!("{name}.scan.svg"))).unwrap().starts_with("<svg"));
    }
}

#[test]
fn explain_is_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let query = configs().join("case1_query.toml");
    let mut files = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}"));
        let o = run(&["explain", s(&query), "--model", "scripted:goal_seeker", "--seed", "3", "--out", s(&out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(out.join("manifest.json").exists());
        assert!(out.join("base.svg").exists());
        assert!(out.join("cfe_000.svg").exists());
        files.push(std::fs::read(out.join("results.json")).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn sequential_workers_match_default() {
    let dir = tempfile::tempdir().unwrap();
    let query = configs().join("case1_query.toml");
    let mut files = Vec::new();
    for workers in ["0", "1"] {
        let out = dir.path().join(workers);
        let o = run(&["explain", s(&query), "--model", "scripted:goal_seeker", "--workers", workers, "--no-plots", "--out", s(&out)]);
        assert!(o.status.success());
        let json: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("results.json")).unwrap()).unwrap();
        files.push(json["results"].clone());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn set_overrides_query_fields() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "explain",
        s(&configs().join("case1_query.toml")),
        "--model",
        "scripted:goal_seeker",
        "--set",
        "n_cfes=2",
        "--set",
        "ga.generations=3",
        "--no-plots",
        "--out",
        s(dir.path()),
    ]);
    assert!(o.status.success());
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("results.json")).unwrap()).unwrap();
    assert_eq!(json["results"].as_array().unwrap().len(), 2);
    assert!(json["results"].as_array().unwrap().iter().all(|r| r["generations"].as_u64().unwrap() <= 3));
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    assert_eq!(run(&["scan", s(&missing)]).status.code(), Some(2));
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "scenario = \"empty.toml\"\nbounds = [[1.0, 0.0]]\n").unwrap();
    std::fs::write(dir.path().join("empty.toml"), "name = \"e\"\ngoal = [1.0, 0.0]\n").unwrap();
    assert_eq!(run(&["explain", s(&bad), "--model", "scripted:goal_seeker", "--out", s(dir.path())]).status.code(), Some(2));
    assert_eq!(run(&["explain"]).status.code(), Some(2));
    assert_eq!(run(&["validate-model", "--model", "nonsense:x"]).status.code(), Some(2));
}

#[test]
fn model_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let hello = format!("exec:{BRIDGE} --mode bad-hello");
    let o = run(&["validate-model", "--model", &hello]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error:"));

    let o = run(&["explain", s(&configs().join("case1_query.toml")), "--model", "scripted:goal_seeker", "--set", "bounds=[[-1.0, 0.0]]", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn validate_model_reports_weights_and_rejects_truncation() {
    let dir = tempfile::tempdir().unwrap();
    let net = Network::random(NetworkSpec::conv_policy(180, 2), 5, 0.1).unwrap();
    let good = dir.path().join("policy.toml");
    std::fs::write(&good, net.to_toml_string()).unwrap();
    let o = run(&["validate-model", "--model", &format!("weights:{}", s(&good))]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = String::from_utf8_lossy(&o.stdout);
    assert!(report.starts_with("ok\n"));
    assert!(report.contains("inputs: 183"));
    assert!(report.contains("outputs: 2"));

    let text = std::fs::read_to_string(&good).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    let last_weights = lines.iter().rposition(|l| l.starts_with("weights")).unwrap();
    lines[last_weights] = "weights = [0.5]";
    let truncated = dir.path().join("truncated.toml");
    std::fs::write(&truncated, lines.join("\n")).unwrap();
    let o = run(&["validate-model", "--model", &format!("weights:{}", s(&truncated))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dense"));
}

#[test]
fn validate_model_accepts_reference_bridge() {
    let o = run(&["validate-model", "--model", &format!("exec:{BRIDGE} --mode rule")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("inputs: 183"));
}
