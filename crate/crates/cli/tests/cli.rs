use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SCENARIO: &str = r#"{
    "name": "tiny",
    "duration_s": 7200,
    "targets": {"generate": {"count": 20, "seed": 3}},
    "uncertainty": {"sigma_pos_m": 1000, "planning_samples": 3, "seed": 4},
    "planners": {"milp_time_limit_s": 10},
    "evaluation": {"samples": 3, "seed": 5}
}"#;

fn sattask(args: &[&str], root: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sattask"))
        .args(args)
        .env("SATTASK_OUTPUT_ROOT", root)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn write_scenario(dir: &Path, text: &str) -> String {
    let path = dir.join("scenario.json");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_writes_a_full_output_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write_scenario(tmp.path(), SCENARIO);
    let out = sattask(&["run", "--scenario", &scenario, "--threads", "2"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("tiny");
    for name in ["manifest.json", "evaluation.csv", "plan_graph.json", "plan_mdp.json", "plan_milp.json"] {
        assert!(dir.join(name).is_file(), "{name} missing");
    }
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("approach"));
    assert!(stdout.contains("milp"));

    // Replaying the manifest reproduces the plans.
    let again = tmp.path().join("again");
    let manifest = dir.join("manifest.json");
    let out = sattask(
        &["run", "--manifest", manifest.to_str().unwrap(), "--out-dir", again.to_str().unwrap()],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["plan_graph.json", "plan_mdp.json", "plan_milp.json"] {
        assert_eq!(fs::read(dir.join(name)).unwrap(), fs::read(again.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn planner_flag_limits_the_planners() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write_scenario(tmp.path(), SCENARIO);
    let out_dir = tmp.path().join("subset");
    let out = sattask(
        &["run", "--scenario", &scenario, "--planners", "graph,mdp", "--out-dir", out_dir.to_str().unwrap()],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("plan_graph.json").is_file());
    assert!(!out_dir.join("plan_milp.json").exists());
}

#[test]
fn staged_commands_chain() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write_scenario(tmp.path(), SCENARIO);
    let dir = tmp.path().join("staged");
    let d = dir.to_str().unwrap();
    let steps: [(&str, &[&str]); 6] = [
        ("targets", &["targets.json"]),
        ("propagate", &["nominal_trajectory.csv"]),
        ("windows", &["windows.csv", "collects.csv"]),
        ("mc-stats", &["window_statistics.csv", "collect_probabilities.json"]),
        ("plan", &["plan_graph.json", "runtimes.json"]),
        ("evaluate", &["evaluation.csv", "evaluation.json"]),
    ];
    for (cmd, files) in steps {
        let out = sattask(&[cmd, "--scenario", &scenario, "--out-dir", d], tmp.path());
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        for f in files {
            assert!(dir.join(f).is_file(), "{cmd} did not write {f}");
        }
    }
    let csv = fs::read_to_string(dir.join("evaluation.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);

    let out = sattask(&["targets", "--count", "7", "--seed", "9", "--out-dir", d], tmp.path());
    assert!(out.status.success());
    let targets: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("targets.json")).unwrap()).unwrap();
    assert_eq!(targets.as_array().unwrap().len(), 7);
}

#[test]
fn bad_configuration_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write_scenario(tmp.path(), r#"{"duration_s": -5}"#);
    assert_eq!(sattask(&["run", "--scenario", &scenario], tmp.path()).status.code(), Some(2));
    let scenario = write_scenario(tmp.path(), SCENARIO);
    let out = sattask(&["run", "--scenario", &scenario, "--planners", "greedy"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let scenario = write_scenario(tmp.path(), "{ not json");
    assert_eq!(sattask(&["propagate", "--scenario", &scenario], tmp.path()).status.code(), Some(2));
}

#[test]
fn stage_failure_exits_3_with_a_failed_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad_targets.json"), "[{\"lat_deg\": 400}]").unwrap();
    let scenario = write_scenario(
        tmp.path(),
        r#"{"name": "broken", "duration_s": 3600, "targets": {"file": {"path": "bad_targets.json"}}}"#,
    );
    let out = sattask(&["run", "--scenario", &scenario], tmp.path());
    assert_eq!(out.status.code(), Some(3));
    let manifest = fs::read_to_string(tmp.path().join("broken").join("manifest.json")).unwrap();
    assert!(manifest.contains("\"FAILED\""));

    // A stage run before its inputs exist is a stage failure too.
    let scenario = write_scenario(tmp.path(), SCENARIO);
    let empty = tmp.path().join("empty");
    let out = sattask(&["plan", "--scenario", &scenario, "--out-dir", empty.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(3));
}
