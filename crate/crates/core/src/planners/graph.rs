use std::collections::BTreeSet;
use std::time::Instant;

use super::{check_inputs, TaskPlan};
use crate::access::{slew_feasible, Collect, ConstraintSet};
use crate::error::Result;

/// Longest reward-weighted path through the collect graph.
///
/// Nodes are collects plus a virtual source; an edge `i -> j` exists when
/// the slew from `i` to `j` is feasible and the two collects image different
/// targets. Start-time order is a topological order, so one relaxation pass
/// gives `R_j = r_j + max(0, max_i R_i)`. Repeats of an image that survive on
/// non-adjacent nodes are spliced out afterwards, keeping the earliest.
pub fn plan_graph(collects: &[Collect], rewards: &[f64], cs: &ConstraintSet) -> Result<TaskPlan> {
    let started = Instant::now();
    let (path, _) = longest_path(collects, rewards, cs)?;

    let mut kept: Vec<usize> = Vec::with_capacity(path.len());
    let mut images = BTreeSet::new();
    for j in path {
        let c = &collects[j];
        if images.contains(&c.image_id) {
            continue;
        }
        if let Some(&last) = kept.last() {
            if !slew_feasible(&collects[last], c, cs.max_slew_rate) {
                continue;
            }
        }
        images.insert(c.image_id);
        kept.push(j);
    }

    let mut plan = TaskPlan::from_collects("graph", &kept, collects, rewards);
    plan.runtime_s = started.elapsed().as_secs_f64();
    Ok(plan)
}

/// The heaviest path of the collect graph and its weight, before any
/// repeated images are removed. Ties go to the lowest collect id.
pub fn longest_path(collects: &[Collect], rewards: &[f64], cs: &ConstraintSet) -> Result<(Vec<usize>, f64)> {
    check_inputs(collects, rewards)?;
    let n = collects.len();
    let mut best = vec![0.0; n];
    let mut pred: Vec<Option<usize>> = vec![None; n];

    for j in 0..n {
        let cj = &collects[j];
        let mut value = 0.0;
        let mut from = None;
        for i in 0..j {
            let ci = &collects[i];
            if ci.image_id == cj.image_id || best[i] <= value {
                continue;
            }
            if slew_feasible(ci, cj, cs.max_slew_rate) {
                value = best[i];
                from = Some(i);
            }
        }
        best[j] = value + rewards[cj.image_id];
        pred[j] = from;
    }

    let mut path = Vec::new();
    let mut end = None;
    for j in 0..n {
        if end.is_none_or(|e: usize| best[j] > best[e]) {
            end = Some(j);
        }
    }
    let mut cursor = end;
    while let Some(j) = cursor {
        path.push(j);
        cursor = pred[j];
    }
    path.reverse();
    Ok((path, end.map_or(0.0, |e| best[e])))
}
