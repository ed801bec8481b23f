use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;

use super::{check_inputs, reward, Action, MdpState, TaskPlan};
use crate::access::{action_space, nil_successor, Collect, ConstraintSet};
use crate::error::{Error, Result};
use crate::uncertainty::CollectProbabilityTable;

/// Deepest lookahead accepted by [`plan_mdp_forward_search`].
pub const MAX_DEPTH: usize = 4;

/// Depth-limited expectimax over the tasking MDP.
///
/// Taking collect `c` leads to two successors that both advance the clock
/// to the end of `c`: success (image flagged, weight `p(c)`) and failure
/// (flags unchanged, weight `1 - p(c)`). A state with nothing left to wait
/// for is absorbing, so its remaining value is `R(s)` per remaining level.
pub struct ForwardSearch<'a> {
    collects: &'a [Collect],
    rewards: &'a [f64],
    cs: &'a ConstraintSet,
    probs: Vec<Option<f64>>,
    expansions: AtomicUsize,
    widest: AtomicUsize,
}

impl<'a> ForwardSearch<'a> {
    pub fn new(
        collects: &'a [Collect],
        rewards: &'a [f64],
        cs: &'a ConstraintSet,
        probs: &CollectProbabilityTable,
    ) -> Result<Self> {
        check_inputs(collects, rewards)?;
        Ok(Self {
            collects,
            rewards,
            cs,
            probs: (0..collects.len()).map(|id| probs.get(id)).collect(),
            expansions: AtomicUsize::new(0),
            widest: AtomicUsize::new(0),
        })
    }

    /// Just before the first collect, nothing collected.
    pub fn initial_state(&self) -> Option<MdpState> {
        let first = self.collects.first()?;
        Some(MdpState::new(
            first.t_start - (0.5 * self.cs.lookahead).min(1e-3),
            self.rewards.len(),
        ))
    }

    /// Nodes expanded (calls with depth > 0) since construction or the last reset.
    pub fn expansions(&self) -> usize {
        self.expansions.load(Ordering::Relaxed)
    }

    /// Largest `|A(s)|` seen since construction or the last reset.
    pub fn widest_action_space(&self) -> usize {
        self.widest.load(Ordering::Relaxed)
    }

    pub fn reset_counters(&self) {
        self.expansions.store(0, Ordering::Relaxed);
        self.widest.store(0, Ordering::Relaxed);
    }

    fn probability(&self, id: usize) -> Result<f64> {
        self.probs[id].ok_or(Error::MissingProbability(id))
    }

    /// State after collect `id` with the given outcome.
    pub fn after_collect(&self, s: &MdpState, id: usize, success: bool) -> MdpState {
        let c = &self.collects[id];
        let mut next = s.clone();
        next.time = c.t_end;
        next.last_collect = Some(id);
        if success {
            next.set_collected(c.image_id);
        }
        next
    }

    /// `(a*, v*)` for `s` searched `depth` levels deep.
    pub fn select_action(&self, s: &MdpState, depth: usize) -> Result<(Action, f64)> {
        self.search(s, depth, reward(s, self.rewards), true)
    }

    fn action_value(&self, s: &MdpState, a: Action, depth: usize, r_s: f64) -> Result<f64> {
        let mut v = r_s;
        match a {
            Action::Nil => match nil_successor(s, self.collects, self.cs) {
                Some(next) => v += self.search(&next, depth - 1, r_s, false)?.1,
                None => v += (depth - 1) as f64 * r_s,
            },
            Action::Collect(id) => {
                let p = self.probability(id)?;
                if p > 0.0 {
                    let gain = 2.0 * self.rewards[self.collects[id].image_id];
                    let next = self.after_collect(s, id, true);
                    v += p * self.search(&next, depth - 1, r_s + gain, false)?.1;
                }
                if p < 1.0 {
                    let next = self.after_collect(s, id, false);
                    v += (1.0 - p) * self.search(&next, depth - 1, r_s, false)?.1;
                }
            }
        }
        Ok(v)
    }

    fn search(&self, s: &MdpState, depth: usize, r_s: f64, root: bool) -> Result<(Action, f64)> {
        if depth == 0 {
            return Ok((Action::Nil, 0.0));
        }
        self.expansions.fetch_add(1, Ordering::Relaxed);
        let actions = action_space(s, self.collects, self.cs);
        self.widest.fetch_max(actions.len(), Ordering::Relaxed);

        let values: Vec<Result<f64>> = if root && depth > 1 {
            actions
                .par_iter()
                .map(|&a| self.action_value(s, a, depth, r_s))
                .collect()
        } else {
            actions.iter().map(|&a| self.action_value(s, a, depth, r_s)).collect()
        };

        // NIL comes first and collects follow in id order, so keeping the
        // first maximum breaks ties toward NIL and then the lowest id.
        let mut best = (Action::Nil, f64::NEG_INFINITY);
        for (a, v) in actions.into_iter().zip(values) {
            let v = v?;
            if v > best.1 {
                best = (a, v);
            }
        }
        Ok(best)
    }
}

/// One-shot form of [`ForwardSearch::select_action`].
pub fn select_action(
    s: &MdpState,
    depth: usize,
    collects: &[Collect],
    rewards: &[f64],
    cs: &ConstraintSet,
    probs: &CollectProbabilityTable,
) -> Result<(Action, f64)> {
    ForwardSearch::new(collects, rewards, cs, probs)?.select_action(s, depth)
}

/// Builds a static plan by repeated forward search, advancing the state
/// as if every chosen collect succeeds.
///
/// `depth` counts decisions looked ahead. The expectimax is run one level
/// deeper because the bottom level only contributes `R(s)`, which is the
/// same for every action at that node.
pub fn plan_mdp_forward_search(
    collects: &[Collect],
    rewards: &[f64],
    cs: &ConstraintSet,
    probs: &CollectProbabilityTable,
    depth: usize,
) -> Result<TaskPlan> {
    let started = Instant::now();
    if !(1..=MAX_DEPTH).contains(&depth) {
        return Err(Error::Config(format!("search depth {depth} outside 1..={MAX_DEPTH}")));
    }
    let search = ForwardSearch::new(collects, rewards, cs, probs)?;
    let mut chosen = Vec::new();
    if let Some(mut s) = search.initial_state() {
        loop {
            if collects.last().is_none_or(|c| c.t_start <= s.time) {
                break;
            }
            let (action, _) = search.select_action(&s, depth + 1)?;
            s = match action {
                Action::Collect(id) => {
                    chosen.push(id);
                    search.after_collect(&s, id, true)
                }
                Action::Nil => match nil_successor(&s, collects, cs) {
                    Some(next) => next,
                    None => break,
                },
            };
        }
    }
    let mut plan = TaskPlan::from_collects("mdp", &chosen, collects, rewards);
    plan.runtime_s = started.elapsed().as_secs_f64();
    Ok(plan)
}
