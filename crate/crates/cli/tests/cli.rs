use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"{"seed": 4, "suite": {"count": 10}, "reward_training": {"epochs": 5}, "student": {"epochs": 20}}"#;

fn wpt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpt"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let o = wpt(dir, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

fn setup() -> tempfile::TempDir {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("cfg.json"), SMALL).unwrap();
    d
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn suite_generation_is_reproducible() {
    let d = setup();
    ok(d.path(), &["gen-scenarios", "--config", "cfg.json", "--out", "a"]);
    ok(d.path(), &["gen-scenarios", "--config", "cfg.json", "--out", "b", "--parallel", "2"]);
    let a = std::fs::read(d.path().join("a/suite.json")).unwrap();
    assert_eq!(a, std::fs::read(d.path().join("b/suite.json")).unwrap());
    ok(d.path(), &["gen-scenarios", "--config", "cfg.json", "--out", "c", "--seed", "5"]);
    assert_ne!(a, std::fs::read(d.path().join("c/suite.json")).unwrap());
}

#[test]
fn expert_replay_has_zero_displacement() {
    let d = setup();
    ok(d.path(), &["gen-scenarios", "--config", "cfg.json", "--out", "o"]);
    ok(d.path(), &["eval", "--policy", "expert", "--config", "cfg.json", "--suite", "o/suite.json", "--out", "o"]);
    let r = json(&d.path().join("o/eval_open_loop.json"));
    assert_eq!(r["kind"], "open-loop-report");
    assert_eq!(r["body"]["l2_avg"], 0.0);
    assert_eq!(r["body"]["scenario_count"], 10);
}

#[test]
fn full_chain_runs() {
    let d = setup();
    let base = ["--config", "cfg.json", "--suite", "o/suite.json", "--out", "o"];
    let with = |extra: &[&'static str]| [extra, &base[..]].concat();
    ok(d.path(), &["gen-scenarios", "--config", "cfg.json", "--out", "o"]);
    ok(d.path(), &with(&["train-reward"]));
    ok(d.path(), &with(&["run-teacher"]));
    ok(d.path(), &with(&["run-teacher", "--reward-source", "learned", "--reward-params", "o/reward_params.json"]));
    ok(d.path(), &with(&["distill-student", "--teacher-cache", "o/teacher_cache.json"]));
    ok(d.path(), &with(&["eval", "--policy", "student", "--student-params", "o/student_params.json", "--split", "test"]));
    let r = json(&d.path().join("o/eval_closed_loop.json"));
    assert_eq!(r["body"]["scenario_count"], 5);
    assert!(r["inputs"]["student_params"].is_string());
    let loss = std::fs::read_to_string(d.path().join("o/student_loss.csv")).unwrap();
    assert!(loss.starts_with("step,loss\n"));
}

#[test]
fn exit_codes() {
    let d = setup();
    ok(d.path(), &["gen-scenarios", "--config", "cfg.json", "--out", "o"]);
    let code = |args: &[&str]| wpt(d.path(), args).status.code();
    assert_eq!(code(&["gen-scenarios", "--no-such-flag"]), Some(2));
    assert_eq!(code(&["train-reward", "--config", "cfg.json", "--suite", "missing.json", "--out", "o"]), Some(5));
    assert_eq!(
        code(&["distill-student", "--config", "cfg.json", "--suite", "o/suite.json", "--out", "o", "--teacher-cache", "o/suite.json"]),
        Some(4)
    );
    assert_eq!(code(&["ablate", "--axis", "speed", "--config", "cfg.json", "--suite", "o/suite.json", "--out", "o"]), Some(3));
    // The suite was generated under a different configuration.
    assert_eq!(code(&["train-reward", "--suite", "o/suite.json", "--out", "o"]), Some(4));
    let e = wpt(d.path(), &["train-reward", "--config", "cfg.json", "--suite", "missing.json", "--out", "o"]);
    let report: serde_json::Value = serde_json::from_slice(&e.stderr).unwrap();
    assert!(report["error"].is_string() && report["message"].is_string());
}
