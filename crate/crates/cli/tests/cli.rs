use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cb-lab"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cb-lab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(path: &PathBuf) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn ci_then_cb_check() {
    let ci = scratch("ci.json");
    let out = run(&["--seed", "3", "gen", "ci", "--a", "2", "--b", "2", "-o", ci.to_str().unwrap()]);
    assert!(out.status.success());
    let rep = json(&ci);
    assert_eq!(rep["report"]["schema_version"], 1);
    assert_eq!(rep["report"]["spec"]["command"], "gen");
    let out = run(&["cb-check", "--config", ci.to_str().unwrap(), "--r", "1"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["report"]["result"]["verdict"]["satisfied"], true);
    let out = run(&["cb-check", "--config", ci.to_str().unwrap(), "--r", "2", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("points,r,satisfied,rank,failing\n4,2,false,"));
}

#[test]
fn embedded_spec_replays_exactly() {
    let first = scratch("orbit.json");
    let second = scratch("orbit_replay.json");
    let out = run(&["--seed", "9", "gen", "orbit", "--ambient", "3", "--e", "5", "-o", first.to_str().unwrap()]);
    assert!(out.status.success());
    let out = run(&["--spec", first.to_str().unwrap(), "-o", second.to_str().unwrap()]);
    assert!(out.status.success());
    let (a, b) = (json(&first), json(&second));
    assert_eq!(a["report"]["result"], b["report"]["result"]);
    assert_eq!(a["report"]["spec"]["seed"], b["report"]["spec"]["seed"]);
}

#[test]
fn section_fit_cover_chain() {
    let sec = scratch("sec.json");
    let fit = scratch("fit.json");
    let out = run(&["--seed", "2", "gen", "section", "--n", "1", "--d", "7", "-o", sec.to_str().unwrap()]);
    assert!(out.status.success());
    let cfg = &json(&sec)["report"]["result"]["config"];
    let m = cfg["points"].as_array().unwrap().len();
    let out = run(&["curve-fit", "--config", sec.to_str().unwrap(), "--k", "1", "-o", fit.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&[
        "cover",
        "--config",
        sec.to_str().unwrap(),
        "--base-curve",
        fit.to_str().unwrap(),
        "--k",
        "1",
        "--d",
        "7",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let r = &v["report"]["result"];
    assert_eq!(r["success"], true);
    assert_eq!(r["covered"].as_array().unwrap().len(), m);
    assert!(r["audit"]["covered_after"].is_array());
    assert_eq!(r["invariance"]["invariant"], true);
}

#[test]
fn bounds_outputs() {
    let out = run(&["bounds", "--sweep", "--k-max", "2", "--d-max", "40", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("d,r,k,verdict,first_violation"));
    assert!(lines.all(|l| l.contains(",pass,")));
    let out = run(&["bounds", "--check", "11", "4", "1"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["report"]["result"]["dagger"]["verdict"], false);
    assert!(v["report"]["result"]["ledger"].is_null());
    let out = run(&["bounds", "--main", "2", "2", "37"]);
    assert!(out.status.success());
    let out = run(&["bounds", "--cc", "2", "1", "0", "7"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["report"]["result"]["implication"], true);
}

#[test]
fn census_and_pipeline_csv() {
    let out = run(&["--seed", "1", "census", "--p", "7", "--budget", "200", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("seed,sample,source,collinear,orbit\n"));
    let out = run(&["--seed", "4", "pipeline", "--n", "1", "--k", "1", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("4,true,"));
}

#[test]
fn usage_and_input_errors_exit_2() {
    assert_eq!(run(&["cb-check", "--config", "/nonexistent/config.json", "--r", "1"]).status.code(), Some(2));
    assert_eq!(run(&["bounds"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
    let ci = scratch("ci_field.json");
    run(&["gen", "ci", "--a", "1", "--b", "2", "-o", ci.to_str().unwrap()]);
    let out = run(&["--field", "F7", "cb-check", "--config", ci.to_str().unwrap(), "--r", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["--field", "F101", "cb-check", "--config", ci.to_str().unwrap(), "--r", "1"]);
    assert!(out.status.success());
}

#[test]
fn bare_configuration_takes_field_flag() {
    let cfg = scratch("bare.json");
    std::fs::write(&cfg, r#"{"ambient_dim": 2, "points": [["1","0","0"],["1","1","1"],["1","2","2"]]}"#).unwrap();
    let out = run(&["--field", "Q", "cb-check", "--config", cfg.to_str().unwrap(), "--r", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["report"]["result"]["verdict"]["satisfied"], true);
    assert_eq!(run(&["cb-check", "--config", cfg.to_str().unwrap(), "--r", "1"]).status.code(), Some(2));
}
