use std::fs;
use std::path::Path;

use sattask::access::load_targets;
use sattask::pipeline::{
    plan_file, run_pipeline, Manifest, RunStatus, COLLECTS_FILE, EVALUATION_CSV_FILE, EVALUATION_JSON_FILE,
    MANIFEST_FILE, PROBABILITIES_FILE, RUNTIMES_FILE, TARGETS_FILE, TRAJECTORY_FILE, WINDOWS_FILE,
    WINDOW_STATISTICS_FILE,
};
use sattask::scenario::{generate_targets, PlannerKind, Scenario, TargetSource};
use sattask::Error;

/// Kolmogorov-Smirnov statistic of `xs` against the uniform law on `[a, b]`.
fn ks_uniform(mut xs: Vec<f64>, a: f64, b: f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, x)| {
            let f = (x - a) / (b - a);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn generated_targets_are_uniform_on_the_sphere() {
    let n = 10_000;
    let targets = generate_targets(n, 7).unwrap();
    assert_eq!(targets.len(), n);
    assert!(targets.iter().enumerate().all(|(k, t)| t.id == k && t.reward == 1.0));
    // 1% critical value.
    let crit = 1.63 / (n as f64).sqrt();
    let sin_lat = targets.iter().map(|t| t.center.latitude.sin()).collect();
    let lon = targets.iter().map(|t| t.center.longitude).collect();
    let pi = std::f64::consts::PI;
    assert!(ks_uniform(sin_lat, -1.0, 1.0) < crit);
    assert!(ks_uniform(lon, -pi, pi) < crit);

    assert_eq!(generate_targets(1, 7).unwrap().len(), 1);
    assert!(generate_targets(0, 7).is_err());
    assert_eq!(generate_targets(50, 3).unwrap(), generate_targets(50, 3).unwrap());
    assert_ne!(generate_targets(50, 3).unwrap(), generate_targets(50, 4).unwrap());
}

fn small_scenario(name: &str) -> Scenario {
    let text = format!(
        r#"{{
            "name": "{name}",
            "duration_s": 10800,
            "targets": {{"generate": {{"count": 30, "seed": 5}}}},
            "uncertainty": {{"sigma_pos_m": 2000, "planning_samples": 4, "seed": 11}},
            "planners": {{"milp_time_limit_s": 20}},
            "evaluation": {{"samples": 4, "seed": 12}}
        }}"#
    );
    Scenario::from_json_str(&text, Path::new(".")).unwrap()
}

const ALL_FILES: [&str; 10] = [
    TARGETS_FILE,
    TRAJECTORY_FILE,
    WINDOWS_FILE,
    COLLECTS_FILE,
    WINDOW_STATISTICS_FILE,
    PROBABILITIES_FILE,
    RUNTIMES_FILE,
    EVALUATION_JSON_FILE,
    EVALUATION_CSV_FILE,
    MANIFEST_FILE,
];

#[test]
fn full_run_writes_every_artifact_and_reproduces() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = small_scenario("small");
    let first = tmp.path().join("a");
    let manifest = run_pipeline(&scenario, &first).unwrap();
    assert_eq!(manifest.status, RunStatus::Ok);
    assert_eq!(manifest.stages.len(), 6);
    assert_eq!(manifest.seeds.targets, Some(5));
    assert_eq!(manifest.seeds.planning, 11);
    assert_eq!(manifest.seeds.evaluation, 12);
    for name in ALL_FILES {
        assert!(first.join(name).is_file(), "{name} missing");
    }
    for kind in PlannerKind::ALL {
        assert!(first.join(plan_file(kind)).is_file());
    }
    let csv = fs::read_to_string(first.join(EVALUATION_CSV_FILE)).unwrap();
    assert_eq!(csv.lines().count(), 4);

    // Rerun from the recorded manifest alone.
    let recorded = Manifest::read(&first.join(MANIFEST_FILE)).unwrap();
    assert_eq!(recorded.config_sha256, scenario.config_sha256().unwrap());
    let second = tmp.path().join("b");
    run_pipeline(&recorded.scenario, &second).unwrap();
    for name in [TARGETS_FILE, TRAJECTORY_FILE, COLLECTS_FILE, PROBABILITIES_FILE] {
        assert_eq!(fs::read(first.join(name)).unwrap(), fs::read(second.join(name)).unwrap(), "{name}");
    }
    for kind in PlannerKind::ALL {
        let name = plan_file(kind);
        assert_eq!(fs::read(first.join(&name)).unwrap(), fs::read(second.join(&name)).unwrap(), "{name}");
    }

    // The file stores degrees, so a file source matches the generator to
    // rounding.
    let mut from_file = scenario.clone();
    from_file.targets = TargetSource::File {
        path: first.join(TARGETS_FILE),
    };
    from_file.validate().unwrap();
    let loaded = from_file.build_targets().unwrap();
    assert_eq!(loaded, load_targets(&first.join(TARGETS_FILE)).unwrap());
    for (a, b) in loaded.iter().zip(&scenario.build_targets().unwrap()) {
        assert_eq!(a.id, b.id);
        assert!((a.center.latitude - b.center.latitude).abs() < 1e-14);
        assert!((a.center.longitude - b.center.longitude).abs() < 1e-14);
        assert!((a.look_angle_max - b.look_angle_max).abs() < 1e-14);
    }
}

#[test]
fn planner_subset_skips_the_others() {
    let tmp = tempfile::tempdir().unwrap();
    let mut scenario = small_scenario("subset");
    scenario.planners.enabled = PlannerKind::parse_list("graph,mdp").unwrap();
    run_pipeline(&scenario, tmp.path()).unwrap();
    assert!(tmp.path().join(plan_file(PlannerKind::Graph)).is_file());
    assert!(tmp.path().join(plan_file(PlannerKind::Mdp)).is_file());
    assert!(!tmp.path().join(plan_file(PlannerKind::Milp)).exists());
    let csv = fs::read_to_string(tmp.path().join(EVALUATION_CSV_FILE)).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(!csv.contains("milp"));
}

#[test]
fn a_failing_stage_leaves_a_failed_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("targets_in.json");
    fs::write(&bad, "[{\"not\": \"a target\"}]").unwrap();
    let mut scenario = small_scenario("broken");
    scenario.targets = TargetSource::File { path: bad };
    let out = tmp.path().join("out");
    match run_pipeline(&scenario, &out) {
        Err(Error::Stage { stage, .. }) => assert_eq!(stage, "targets"),
        other => panic!("expected a stage error, got {other:?}"),
    }
    let text = fs::read_to_string(out.join(MANIFEST_FILE)).unwrap();
    let manifest: Manifest = serde_json::from_str(&text).unwrap();
    assert_eq!(manifest.status, RunStatus::Failed);
    assert_eq!(manifest.failed_stage(), Some("targets"));
    assert!(manifest.stages[0].error.is_some());
    assert!(!out.join(TARGETS_FILE).exists());
}

#[test]
fn invalid_scenarios_are_rejected_before_running() {
    let tmp = tempfile::tempdir().unwrap();
    let mut scenario = small_scenario("invalid");
    scenario.targets = TargetSource::File {
        path: tmp.path().join("missing.json"),
    };
    assert!(matches!(run_pipeline(&scenario, tmp.path()), Err(Error::Config(_))));
    assert!(!tmp.path().join(MANIFEST_FILE).exists());
}
