//! Scheduling algorithms over a fixed set of collects.
//!
//! All planners take collects sorted by start time with `collects[k].id == k`
//! (the order produced by [`crate::access::discretize`]) and a reward per
//! image id.

mod graph;
mod mdp;
mod milp;

pub use graph::{longest_path, plan_graph};
pub use mdp::{plan_mdp_forward_search, select_action, ForwardSearch, MAX_DEPTH};
pub use milp::{plan_milp, MilpModel, MilpOutcome};

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::access::{slew_feasible, Collect};
use crate::astro::Epoch;
use crate::error::{Error, Result};

/// Planner state: current time, one collected flag per image, and the most
/// recent collect (needed for the slew constraint).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdpState {
    pub time: Epoch,
    flags: Vec<u64>,
    image_count: usize,
    pub last_collect: Option<usize>,
}

impl MdpState {
    pub fn new(time: Epoch, image_count: usize) -> Self {
        Self {
            time,
            flags: vec![0; image_count.div_ceil(64)],
            image_count,
            last_collect: None,
        }
    }

    pub fn image_count(&self) -> usize {
        self.image_count
    }

    pub fn is_collected(&self, image: usize) -> bool {
        image < self.image_count && self.flags[image / 64] >> (image % 64) & 1 == 1
    }

    pub fn set_collected(&mut self, image: usize) {
        assert!(image < self.image_count, "image {image} out of range");
        self.flags[image / 64] |= 1 << (image % 64);
    }

    pub fn collected_count(&self) -> usize {
        self.flags.iter().map(|w| w.count_ones() as usize).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    /// Wait (see [`crate::access::nil_successor`]).
    Nil,
    Collect(usize),
}

/// `R(s) = Σ r_i D(b_i)` with `D = +1` for collected images and `-1` otherwise.
pub fn reward(s: &MdpState, rewards: &[f64]) -> f64 {
    rewards
        .iter()
        .enumerate()
        .map(|(i, r)| if s.is_collected(i) { *r } else { -*r })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub collect_id: usize,
    pub image_id: usize,
    pub t_start: Epoch,
    pub t_end: Epoch,
}

/// An ordered sequence of collects chosen by one planner.
///
/// The wall-clock runtime is kept out of the serialized form so that a
/// rerun produces an identical file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskPlan {
    pub planner: String,
    /// Sum of rewards of the planned images, assuming every collect succeeds.
    pub nominal_reward: f64,
    /// Branch-and-bound only: whether optimality was proven.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimal: Option<bool>,
    pub entries: Vec<PlanEntry>,
    #[serde(skip)]
    pub runtime_s: f64,
}

impl TaskPlan {
    /// Builds a plan from collect ids (any order; sorted by start time here).
    pub fn from_collects(planner: &str, ids: &[usize], collects: &[Collect], rewards: &[f64]) -> Self {
        let mut chosen: Vec<&Collect> = ids.iter().map(|&id| &collects[id]).collect();
        chosen.sort_by(|a, b| a.t_start.cmp(&b.t_start).then(a.id.cmp(&b.id)));
        let mut seen = std::collections::BTreeSet::new();
        let nominal_reward = chosen
            .iter()
            .filter(|c| seen.insert(c.image_id))
            .map(|c| rewards[c.image_id])
            .sum();
        Self {
            planner: planner.to_string(),
            nominal_reward,
            optimal: None,
            entries: chosen
                .iter()
                .map(|c| PlanEntry {
                    collect_id: c.id,
                    image_id: c.image_id,
                    t_start: c.t_start,
                    t_end: c.t_end,
                })
                .collect(),
            runtime_s: 0.0,
        }
    }

    pub fn empty(planner: &str) -> Self {
        Self::from_collects(planner, &[], &[], &[])
    }

    pub fn collect_ids(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.collect_id).collect()
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        Ok(serde_json::from_reader(reader)?)
    }
}

/// Checks the plan invariants against the collect set: known collects,
/// strictly increasing times, pairwise slew feasibility in sequence, at
/// most one collect per image, and a consistent nominal reward.
pub fn check_plan(plan: &TaskPlan, collects: &[Collect], rewards: &[f64], max_slew_rate: f64) -> Result<()> {
    let bad = |msg: String| Err(Error::InvalidInput(format!("plan {}: {msg}", plan.planner)));
    let mut images = std::collections::BTreeSet::new();
    let mut prev: Option<&Collect> = None;
    let mut total = 0.0;
    for e in &plan.entries {
        let Some(c) = collects.get(e.collect_id) else {
            return bad(format!("unknown collect {}", e.collect_id));
        };
        if c.image_id != e.image_id || c.t_start != e.t_start || c.t_end != e.t_end {
            return bad(format!("entry for collect {} does not match the collect set", c.id));
        }
        if !images.insert(c.image_id) {
            return bad(format!("image {} planned twice", c.image_id));
        }
        total += rewards[c.image_id];
        if let Some(p) = prev {
            if c.t_start <= p.t_start {
                return bad(format!("collect {} not after collect {}", c.id, p.id));
            }
            if !slew_feasible(p, c, max_slew_rate) {
                return bad(format!("slew {} -> {} infeasible", p.id, c.id));
            }
        }
        prev = Some(c);
    }
    if (total - plan.nominal_reward).abs() > 1e-9 * total.abs().max(1.0) {
        return bad(format!("nominal reward {} but entries sum to {total}", plan.nominal_reward));
    }
    Ok(())
}

/// Shared input validation.
fn check_inputs(collects: &[Collect], rewards: &[f64]) -> Result<()> {
    for (k, c) in collects.iter().enumerate() {
        if c.id != k {
            return Err(Error::InvalidInput(format!("collect at position {k} has id {}", c.id)));
        }
        if c.image_id >= rewards.len() {
            return Err(Error::InvalidInput(format!("collect {k} references image {} without a reward", c.image_id)));
        }
        if k > 0 && collects[k - 1].t_start > c.t_start {
            return Err(Error::InvalidInput("collects must be sorted by start time".into()));
        }
    }
    Ok(())
}
