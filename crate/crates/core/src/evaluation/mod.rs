//! Replay of plans against sampled "true" trajectories.

use std::collections::BTreeSet;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::access::{find_opportunities_for, ImageTarget, Opportunity};
use crate::astro::StateVector;
use crate::dynamics::{propagate_rk4, Trajectory};
use crate::error::{Error, Result};
use crate::planners::TaskPlan;
use crate::uncertainty::{sample_initial_states_on, OrbitCovariance, PropagationSetup, EVALUATION_STREAM};

/// Reward actually earned when the windows are `windows` (indexed by image
/// id): an image counts once if any of its planned collects lies inside a
/// single window. Collects keep their planned timing.
pub fn realized_reward_from_windows(plan: &TaskPlan, windows: &[Vec<Opportunity>], rewards: &[f64]) -> f64 {
    let mut earned = BTreeSet::new();
    for e in &plan.entries {
        let hit = windows
            .get(e.image_id)
            .is_some_and(|ws| ws.iter().any(|w| w.contains(e.t_start, e.t_end)));
        if hit {
            earned.insert(e.image_id);
        }
    }
    earned.into_iter().map(|i| rewards[i]).sum()
}

fn planned_windows(traj: &Trajectory, targets: &[ImageTarget], images: &BTreeSet<usize>) -> Vec<Vec<Opportunity>> {
    targets
        .iter()
        .map(|t| {
            if images.contains(&t.id) {
                find_opportunities_for(traj, t)
            } else {
                Vec::new()
            }
        })
        .collect()
}

fn planned_images(plans: &[&TaskPlan]) -> BTreeSet<usize> {
    plans.iter().flat_map(|p| p.entries.iter().map(|e| e.image_id)).collect()
}

/// Realized reward of `plan` on one true trajectory.
pub fn realized_reward(plan: &TaskPlan, true_traj: &Trajectory, targets: &[ImageTarget]) -> f64 {
    let windows = planned_windows(true_traj, targets, &planned_images(&[plan]));
    let rewards: Vec<f64> = targets.iter().map(|t| t.reward).collect();
    realized_reward_from_windows(plan, &windows, &rewards)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub planner: String,
    pub nominal_reward: f64,
    /// Realized reward of each successfully propagated sample.
    pub rewards: Vec<f64>,
    pub mean_reward: f64,
    /// Sample standard deviation.
    pub stdev_reward: f64,
    pub runtime_s: f64,
    /// Configured sample count.
    pub samples: usize,
    /// Samples dropped because propagation failed.
    pub failed: usize,
    pub seed: u64,
    pub sigma_pos_m: f64,
}

impl EvaluationReport {
    pub fn from_rewards(plan: &TaskPlan, rewards: Vec<f64>, cov: &OrbitCovariance, failed: usize) -> Self {
        let (mean_reward, stdev_reward) = mean_stdev(&rewards);
        Self {
            planner: plan.planner.clone(),
            nominal_reward: plan.nominal_reward,
            rewards,
            mean_reward,
            stdev_reward,
            runtime_s: plan.runtime_s,
            samples: cov.samples,
            failed,
            seed: cov.seed,
            sigma_pos_m: cov.sigma_pos,
        }
    }
}

/// Mean and sample standard deviation (zero for fewer than two values).
pub fn mean_stdev(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Evaluates several plans on one shared set of true trajectories drawn on
/// the evaluation stream.
pub fn evaluate_many(
    plans: &[TaskPlan],
    nominal: &StateVector,
    cov: &OrbitCovariance,
    targets: &[ImageTarget],
    setup: &PropagationSetup,
) -> Result<Vec<EvaluationReport>> {
    let truths = sample_initial_states_on(nominal, cov, EVALUATION_STREAM)?;
    let images = planned_images(&plans.iter().collect::<Vec<_>>());
    let rewards: Vec<f64> = targets.iter().map(|t| t.reward).collect();

    let per_sample: Vec<Result<Vec<f64>>> = truths
        .par_iter()
        .map(|s| {
            let traj = propagate_rk4(s, &setup.spacecraft, &setup.force_model, setup.duration, setup.step)?;
            let windows = planned_windows(&traj, targets, &images);
            Ok(plans.iter().map(|p| realized_reward_from_windows(p, &windows, &rewards)).collect())
        })
        .collect();

    let mut by_plan = vec![Vec::with_capacity(truths.len()); plans.len()];
    let mut failed = 0;
    for (k, r) in per_sample.into_iter().enumerate() {
        match r {
            Ok(values) => {
                for (slot, v) in by_plan.iter_mut().zip(values) {
                    slot.push(v);
                }
            }
            Err(e) => {
                log::warn!("evaluation sample {k} failed: {e}");
                failed += 1;
            }
        }
    }
    if failed == truths.len() {
        return Err(Error::InvalidInput("every evaluation sample failed to propagate".into()));
    }
    Ok(plans
        .iter()
        .zip(by_plan)
        .map(|(p, r)| EvaluationReport::from_rewards(p, r, cov, failed))
        .collect())
}

pub fn evaluate(
    plan: &TaskPlan,
    nominal: &StateVector,
    cov: &OrbitCovariance,
    targets: &[ImageTarget],
    setup: &PropagationSetup,
) -> Result<EvaluationReport> {
    Ok(evaluate_many(std::slice::from_ref(plan), nominal, cov, targets, setup)?.remove(0))
}

/// One row per report: `approach,runtime_s,mean_reward,stdev_reward`.
pub fn write_reports_csv<W: Write>(writer: W, reports: &[EvaluationReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["approach", "runtime_s", "mean_reward", "stdev_reward"])?;
    for r in reports {
        w.write_record([
            r.planner.clone(),
            format!("{:.6}", r.runtime_s),
            r.mean_reward.to_string(),
            r.stdev_reward.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<evaluation csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::astro::Epoch;
    use crate::planners::PlanEntry;

    fn plan(entries: &[(usize, f64, f64)]) -> TaskPlan {
        TaskPlan {
            planner: "test".into(),
            nominal_reward: entries.len() as f64,
            optimal: None,
            entries: entries
                .iter()
                .enumerate()
                .map(|(k, &(image, a, b))| PlanEntry {
                    collect_id: k,
                    image_id: image,
                    t_start: Epoch::J2000 + a,
                    t_end: Epoch::J2000 + b,
                })
                .collect(),
            runtime_s: 0.0,
        }
    }

    fn window(image: usize, a: f64, b: f64) -> Opportunity {
        Opportunity {
            image_id: image,
            t_s: Epoch::J2000 + a,
            t_e: Epoch::J2000 + b,
        }
    }

    #[test]
    fn containment_counts_images_once() {
        let windows = vec![vec![window(0, 0.0, 100.0)], vec![window(1, 200.0, 300.0)]];
        let p = plan(&[(0, 10.0, 20.0), (0, 30.0, 40.0), (1, 295.0, 305.0)]);
        assert_eq!(realized_reward_from_windows(&p, &windows, &[1.0, 1.0]), 1.0);
        let shifted = vec![vec![window(0, 15.0, 100.0)], vec![window(1, 200.0, 310.0)]];
        assert_eq!(realized_reward_from_windows(&p, &shifted, &[1.0, 3.0]), 4.0);
        assert_eq!(realized_reward_from_windows(&plan(&[]), &windows, &[1.0, 1.0]), 0.0);
    }

    #[test]
    fn straddling_two_windows_fails() {
        let windows = vec![vec![window(0, 0.0, 15.0), window(0, 15.0, 40.0)]];
        assert_eq!(realized_reward_from_windows(&plan(&[(0, 10.0, 20.0)]), &windows, &[1.0]), 0.0);
    }

    #[test]
    fn sample_statistics() {
        assert_eq!(mean_stdev(&[]), (0.0, 0.0));
        assert_eq!(mean_stdev(&[3.0]), (3.0, 0.0));
        let (m, s) = mean_stdev(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }
}
