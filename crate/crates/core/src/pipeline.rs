//! End-to-end experiment: targets, nominal trajectory, windows, Monte Carlo
//! statistics, planning and evaluation, each stage writing its artifacts to
//! one output directory.
//!
//! The stage functions can also be called one at a time; the `load_*`
//! helpers read back what earlier stages wrote.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::access::{
    discretize, find_opportunities, read_collects_csv, read_targets_json, rewards, write_collects_csv,
    write_opportunities_csv, write_targets_json, Collect, ImageTarget, Opportunity,
};
use crate::dynamics::{propagate_rk4, Trajectory};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate_many, write_reports_csv, EvaluationReport};
use crate::planners::{plan_graph, plan_mdp_forward_search, plan_milp, TaskPlan};
use crate::scenario::{PlannerKind, Scenario, TargetSource};
use crate::uncertainty::{
    collect_probabilities, ensemble_windows, sample_initial_states, window_statistics, CollectProbabilityTable,
};

pub const TARGETS_FILE: &str = "targets.json";
pub const TRAJECTORY_FILE: &str = "nominal_trajectory.csv";
pub const WINDOWS_FILE: &str = "windows.csv";
pub const COLLECTS_FILE: &str = "collects.csv";
pub const WINDOW_STATISTICS_FILE: &str = "window_statistics.csv";
pub const PROBABILITIES_FILE: &str = "collect_probabilities.json";
pub const RUNTIMES_FILE: &str = "runtimes.json";
pub const EVALUATION_JSON_FILE: &str = "evaluation.json";
pub const EVALUATION_CSV_FILE: &str = "evaluation.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn plan_file(kind: PlannerKind) -> String {
    format!("plan_{kind}.json")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RunStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub status: RunStatus,
    pub elapsed_s: f64,
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    /// Generator seed when targets are random.
    pub targets: Option<u64>,
    pub planning: u64,
    pub evaluation: u64,
}

/// Run record; its `scenario` is enough to reproduce the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub status: RunStatus,
    pub config_sha256: String,
    pub seeds: Seeds,
    pub stages: Vec<StageRecord>,
    pub scenario: Scenario,
}

impl Manifest {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        let targets = match scenario.targets {
            TargetSource::Generate { seed, .. } => Some(seed),
            TargetSource::File { .. } => None,
        };
        Ok(Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            status: RunStatus::Ok,
            config_sha256: scenario.config_sha256()?,
            seeds: Seeds {
                targets,
                planning: scenario.uncertainty.seed,
                evaluation: scenario.evaluation.seed,
            },
            stages: Vec::new(),
            scenario: scenario.clone(),
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let m: Manifest = serde_json::from_reader(BufReader::new(file))?;
        m.scenario.validate()?;
        Ok(m)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_file(dir, MANIFEST_FILE, |w| Ok(serde_json::to_writer_pretty(w, self)?))
    }

    pub fn failed_stage(&self) -> Option<&str> {
        self.stages
            .iter()
            .find(|s| s.status == RunStatus::Failed)
            .map(|s| s.stage.as_str())
    }
}

fn write_file(dir: &Path, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush().map_err(|e| Error::io(&path, e))
}

fn open(dir: &Path, name: &str) -> Result<BufReader<File>> {
    let path = dir.join(name);
    Ok(BufReader::new(File::open(&path).map_err(|e| Error::io(&path, e))?))
}

/// Builds the targets and writes `targets.json`.
pub fn stage_targets(scenario: &Scenario, dir: &Path) -> Result<Vec<ImageTarget>> {
    let targets = scenario.build_targets()?;
    write_file(dir, TARGETS_FILE, |w| write_targets_json(w, &targets))?;
    Ok(targets)
}

/// Propagates the nominal orbit and writes `nominal_trajectory.csv`.
pub fn stage_propagate(scenario: &Scenario, dir: &Path) -> Result<Trajectory> {
    let traj = propagate_rk4(
        &scenario.nominal_state(),
        &scenario.spacecraft,
        &scenario.force_model,
        scenario.duration_s,
        scenario.step_s,
    )?;
    write_file(dir, TRAJECTORY_FILE, |w| traj.write_csv(w))?;
    Ok(traj)
}

/// Finds the nominal windows and their collects; writes `windows.csv`
/// and `collects.csv`.
pub fn stage_windows(
    dir: &Path,
    targets: &[ImageTarget],
    traj: &Trajectory,
) -> Result<(Vec<Vec<Opportunity>>, Vec<Collect>)> {
    let windows = find_opportunities(traj, targets);
    write_file(dir, WINDOWS_FILE, |w| write_opportunities_csv(w, &windows))?;
    let flat: Vec<Opportunity> = windows.iter().flatten().copied().collect();
    let collects = discretize(&flat, targets, traj)?;
    write_file(dir, COLLECTS_FILE, |w| write_collects_csv(w, &collects))?;
    Ok((windows, collects))
}

/// Planning ensemble: writes `window_statistics.csv` and
/// `collect_probabilities.json`.
pub fn stage_uncertainty(
    scenario: &Scenario,
    dir: &Path,
    targets: &[ImageTarget],
    nominal_windows: Vec<Vec<Opportunity>>,
    collects: &[Collect],
) -> Result<CollectProbabilityTable> {
    let cov = scenario.planning_covariance()?;
    let samples = sample_initial_states(&scenario.nominal_state(), &cov)?;
    let ensemble = ensemble_windows(&samples, targets, &scenario.propagation_setup(), nominal_windows)?;
    if !ensemble.failures.is_empty() {
        log::warn!("{} planning samples failed to propagate", ensemble.failures.len());
    }
    let stats = window_statistics(&ensemble)?;
    write_file(dir, WINDOW_STATISTICS_FILE, |w| stats.write_csv(w))?;
    let probs = collect_probabilities(collects, &ensemble, &cov)?;
    write_file(dir, PROBABILITIES_FILE, |w| probs.write_json(w))?;
    Ok(probs)
}

/// Runs the enabled planners; writes one plan file each plus
/// `runtimes.json`. Plan files of planners not enabled are removed.
pub fn stage_plan(
    scenario: &Scenario,
    dir: &Path,
    targets: &[ImageTarget],
    collects: &[Collect],
    probs: &CollectProbabilityTable,
) -> Result<Vec<TaskPlan>> {
    let cfg = &scenario.planners;
    let cs = cfg.constraint_set()?;
    let r = rewards(targets);
    let mut plans = Vec::new();
    let mut runtimes = BTreeMap::new();
    for kind in PlannerKind::ALL {
        if !cfg.enabled.contains(&kind) {
            let stale = dir.join(plan_file(kind));
            if stale.exists() {
                std::fs::remove_file(&stale).map_err(|e| Error::io(&stale, e))?;
            }
            continue;
        }
        let plan = match kind {
            PlannerKind::Graph => plan_graph(collects, &r, &cs)?,
            PlannerKind::Mdp => plan_mdp_forward_search(collects, &r, &cs, probs, cfg.depth)?,
            PlannerKind::Milp => plan_milp(collects, &r, &cs, cfg.milp_time_limit_s)?.0,
        };
        log::info!("{kind}: nominal reward {} in {:.3} s", plan.nominal_reward, plan.runtime_s);
        write_file(dir, &plan_file(kind), |w| plan.write_json(w))?;
        runtimes.insert(kind.as_str().to_string(), plan.runtime_s);
        plans.push(plan);
    }
    write_file(dir, RUNTIMES_FILE, |w| Ok(serde_json::to_writer_pretty(w, &runtimes)?))?;
    Ok(plans)
}

/// Scores the plans on the evaluation ensemble; writes `evaluation.json`
/// and `evaluation.csv`.
pub fn stage_evaluate(
    scenario: &Scenario,
    dir: &Path,
    targets: &[ImageTarget],
    plans: &[TaskPlan],
) -> Result<Vec<EvaluationReport>> {
    let cov = scenario.evaluation_covariance()?;
    let reports = evaluate_many(plans, &scenario.nominal_state(), &cov, targets, &scenario.propagation_setup())?;
    write_file(dir, EVALUATION_JSON_FILE, |w| Ok(serde_json::to_writer_pretty(w, &reports)?))?;
    write_file(dir, EVALUATION_CSV_FILE, |w| write_reports_csv(w, &reports))?;
    Ok(reports)
}

pub fn load_targets_from(dir: &Path) -> Result<Vec<ImageTarget>> {
    read_targets_json(open(dir, TARGETS_FILE)?)
}

pub fn load_trajectory(scenario: &Scenario, dir: &Path) -> Result<Trajectory> {
    Trajectory::read_csv(open(dir, TRAJECTORY_FILE)?, scenario.step_s)
}

pub fn load_collects(dir: &Path) -> Result<Vec<Collect>> {
    read_collects_csv(open(dir, COLLECTS_FILE)?)
}

pub fn load_probabilities(dir: &Path) -> Result<CollectProbabilityTable> {
    CollectProbabilityTable::read_json(open(dir, PROBABILITIES_FILE)?)
}

/// Reads the plans of the enabled planners, restoring their runtimes
/// from `runtimes.json` when present.
pub fn load_plans(scenario: &Scenario, dir: &Path) -> Result<Vec<TaskPlan>> {
    let runtimes: BTreeMap<String, f64> = match open(dir, RUNTIMES_FILE) {
        Ok(r) => serde_json::from_reader(r)?,
        Err(_) => BTreeMap::new(),
    };
    scenario
        .planners
        .enabled
        .iter()
        .map(|&kind| {
            let mut plan = TaskPlan::read_json(open(dir, &plan_file(kind))?)?;
            plan.runtime_s = runtimes.get(kind.as_str()).copied().unwrap_or(0.0);
            Ok(plan)
        })
        .collect()
}

struct Recorder<'a> {
    dir: &'a Path,
    manifest: Manifest,
}

impl Recorder<'_> {
    fn stage<T>(&mut self, name: &'static str, outputs: &[String], f: impl FnOnce() -> Result<T>) -> Result<T> {
        let started = Instant::now();
        let result = f();
        let mut record = StageRecord {
            stage: name.to_string(),
            status: RunStatus::Ok,
            elapsed_s: started.elapsed().as_secs_f64(),
            outputs: outputs.to_vec(),
            error: None,
        };
        match result {
            Ok(value) => {
                log::info!("stage {name} done in {:.2} s", record.elapsed_s);
                self.manifest.stages.push(record);
                Ok(value)
            }
            Err(e) => {
                record.status = RunStatus::Failed;
                record.error = Some(e.to_string());
                record.outputs.clear();
                self.manifest.stages.push(record);
                self.manifest.status = RunStatus::Failed;
                if let Err(w) = self.manifest.write(self.dir) {
                    log::error!("cannot write manifest: {w}");
                }
                Err(Error::Stage {
                    stage: name,
                    source: Box::new(e),
                })
            }
        }
    }
}

/// Runs every stage into `out_dir` (created if missing) and writes
/// `manifest.json`. On a stage failure the outputs written so far are kept,
/// the manifest is marked `FAILED`, and [`Error::Stage`] is returned.
pub fn run_pipeline(scenario: &Scenario, out_dir: &Path) -> Result<Manifest> {
    scenario.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut rec = Recorder {
        dir: out_dir,
        manifest: Manifest::new(scenario)?,
    };
    let names = |n: &[&str]| -> Vec<String> { n.iter().map(|s| s.to_string()).collect() };

    let targets = rec.stage("targets", &names(&[TARGETS_FILE]), || stage_targets(scenario, out_dir))?;
    let traj = rec.stage("propagate", &names(&[TRAJECTORY_FILE]), || stage_propagate(scenario, out_dir))?;
    let (windows, collects) = rec.stage("windows", &names(&[WINDOWS_FILE, COLLECTS_FILE]), || {
        stage_windows(out_dir, &targets, &traj)
    })?;
    let probs = rec.stage(
        "mc-stats",
        &names(&[WINDOW_STATISTICS_FILE, PROBABILITIES_FILE]),
        || stage_uncertainty(scenario, out_dir, &targets, windows, &collects),
    )?;
    let mut plan_outputs: Vec<String> = scenario.planners.enabled.iter().map(|&k| plan_file(k)).collect();
    plan_outputs.push(RUNTIMES_FILE.into());
    let plans = rec.stage("plan", &plan_outputs, || {
        stage_plan(scenario, out_dir, &targets, &collects, &probs)
    })?;
    rec.stage("evaluate", &names(&[EVALUATION_JSON_FILE, EVALUATION_CSV_FILE]), || {
        stage_evaluate(scenario, out_dir, &targets, &plans)
    })?;
    rec.manifest.write(out_dir)?;
    Ok(rec.manifest)
}

/// Output directory for a run: `root` joined with the scenario name.
pub fn default_output_dir(root: &Path, scenario: &Scenario) -> PathBuf {
    root.join(&scenario.name)
}
