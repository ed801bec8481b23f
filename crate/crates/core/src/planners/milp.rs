use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;
use std::io::Write;
use std::time::{Duration, Instant};

use super::{check_inputs, TaskPlan};
use crate::access::{slew_feasible, Collect, ConstraintSet};
use crate::error::{Error, Result};

/// Binary program over collects:
///
/// ```text
/// max  Σ r(c) x_c
/// s.t. Σ_{c ∈ C_i} x_c ≤ 1          for every image i
///      x_k + x_l ≤ 1                 for every pair slew-infeasible both ways
///      x_c ∈ {0, 1}
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel {
    /// Objective coefficient of each variable (indexed by collect id).
    pub objective: Vec<f64>,
    /// `(image id, variables)` at-most-one rows.
    pub image_rows: Vec<(usize, Vec<usize>)>,
    /// Mutual-exclusion pairs `(k, l)` with `k < l`.
    pub exclusions: Vec<(usize, usize)>,
}

impl MilpModel {
    pub fn build(collects: &[Collect], rewards: &[f64], cs: &ConstraintSet) -> Result<Self> {
        check_inputs(collects, rewards)?;
        let objective = collects.iter().map(|c| rewards[c.image_id]).collect();
        let mut rows: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for c in collects {
            rows.entry(c.image_id).or_default().push(c.id);
        }
        // Beyond this gap any slew (at most π rad) is feasible.
        let reach = std::f64::consts::PI / cs.max_slew_rate;
        let max_len = collects.iter().map(Collect::duration).fold(0.0, f64::max);
        let mut exclusions = Vec::new();
        for (k, a) in collects.iter().enumerate() {
            for b in &collects[k + 1..] {
                if b.t_start - a.t_start > max_len + reach {
                    break;
                }
                if a.image_id != b.image_id
                    && !slew_feasible(a, b, cs.max_slew_rate)
                    && !slew_feasible(b, a, cs.max_slew_rate)
                {
                    exclusions.push((a.id, b.id));
                }
            }
        }
        Ok(Self {
            objective,
            image_rows: rows.into_iter().collect(),
            exclusions,
        })
    }

    pub fn variable_count(&self) -> usize {
        self.objective.len()
    }

    /// Feasibility of a 0/1 assignment given as the selected variables.
    pub fn is_feasible(&self, selected: &[usize]) -> bool {
        let mut x = vec![false; self.variable_count()];
        for &v in selected {
            if v >= x.len() || x[v] {
                return false;
            }
            x[v] = true;
        }
        self.image_rows.iter().all(|(_, vars)| vars.iter().filter(|&&v| x[v]).count() <= 1)
            && self.exclusions.iter().all(|&(k, l)| !(x[k] && x[l]))
    }

    /// CPLEX LP text format.
    pub fn to_lp_string(&self) -> String {
        let mut s = String::from("\\ collect selection\nMaximize\n obj:");
        for (v, r) in self.objective.iter().enumerate() {
            let _ = write!(s, " + {r} x{v}");
        }
        s.push_str("\nSubject To\n");
        for (image, vars) in &self.image_rows {
            let terms: Vec<String> = vars.iter().map(|v| format!("x{v}")).collect();
            let _ = writeln!(s, " img{image}: {} <= 1", terms.join(" + "));
        }
        for (n, (k, l)) in self.exclusions.iter().enumerate() {
            let _ = writeln!(s, " ex{n}: x{k} + x{l} <= 1");
        }
        s.push_str("Binary\n");
        for v in 0..self.variable_count() {
            let _ = writeln!(s, " x{v}");
        }
        s.push_str("End\n");
        s
    }

    pub fn write_lp<W: Write>(&self, mut writer: W) -> Result<()> {
        writer
            .write_all(self.to_lp_string().as_bytes())
            .map_err(|e| Error::io("<lp>", e))
    }
}

/// Search statistics from [`plan_milp`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MilpOutcome {
    pub nodes: usize,
    pub components: usize,
    pub optimal: bool,
}

/// One connected block of the conflict graph, in local numbering.
struct Component {
    /// Global variable ids in branching order.
    vars: Vec<usize>,
    /// Local image index of each position.
    image: Vec<usize>,
    reward: Vec<f64>,
    /// Conflicting positions of each position (same image or excluded pair).
    conflicts: Vec<Vec<usize>>,
    image_count: usize,
}

#[derive(Clone)]
struct Node {
    bound: f64,
    value: f64,
    next: usize,
    chosen: Vec<usize>,
    blocked: Vec<bool>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then(self.value.total_cmp(&other.value))
            .then(self.next.cmp(&other.next))
            .then_with(|| other.chosen.cmp(&self.chosen))
    }
}

impl Component {
    /// Selected reward plus every image not yet taken that still has an
    /// undecided, unblocked variable.
    fn bound(&self, value: f64, next: usize, blocked: &[bool], taken: &[bool]) -> f64 {
        let mut open = vec![false; self.image_count];
        let mut extra = 0.0;
        for p in next..self.vars.len() {
            let i = self.image[p];
            if !blocked[p] && !taken[i] && !open[i] {
                open[i] = true;
                extra += self.reward[p];
            }
        }
        value + extra
    }

    fn select(&self, p: usize, blocked: &mut [bool]) {
        blocked[p] = true;
        for &q in &self.conflicts[p] {
            blocked[q] = true;
        }
    }

    fn greedy(&self) -> (f64, Vec<usize>) {
        let mut blocked = vec![false; self.vars.len()];
        let mut chosen = Vec::new();
        let mut value = 0.0;
        for p in 0..self.vars.len() {
            if !blocked[p] {
                chosen.push(p);
                value += self.reward[p];
                self.select(p, &mut blocked);
            }
        }
        (value, chosen)
    }

    /// Best-first branch and bound. Returns the best selection and whether
    /// the search finished before `deadline`.
    fn solve(&self, deadline: Option<Instant>, nodes: &mut usize) -> (Vec<usize>, bool) {
        let (mut best_value, mut best) = self.greedy();
        if deadline.is_some_and(|d| Instant::now() >= d) {
            return (best, false);
        }
        let n = self.vars.len();
        let mut heap = BinaryHeap::new();
        let root_taken = vec![false; self.image_count];
        let root_blocked = vec![false; n];
        heap.push(Node {
            bound: self.bound(0.0, 0, &root_blocked, &root_taken),
            value: 0.0,
            next: 0,
            chosen: Vec::new(),
            blocked: root_blocked,
        });
        const EPS: f64 = 1e-9;
        while let Some(mut node) = heap.pop() {
            if node.bound <= best_value + EPS {
                // Best-first: nothing left can improve.
                heap.clear();
                break;
            }
            *nodes += 1;
            if *nodes % 1024 == 0 && deadline.is_some_and(|d| Instant::now() >= d) {
                return (best, false);
            }
            // Forced rejections need no branching.
            while node.next < n && node.blocked[node.next] {
                node.next += 1;
            }
            if node.next == n {
                if node.value > best_value + EPS {
                    best_value = node.value;
                    best = node.chosen.clone();
                }
                continue;
            }
            let p = node.next;
            let mut taken = vec![false; self.image_count];
            for &q in &node.chosen {
                taken[self.image[q]] = true;
            }

            let mut with = node.clone();
            with.chosen.push(p);
            with.value += self.reward[p];
            self.select(p, &mut with.blocked);
            with.next = p + 1;
            let mut with_taken = taken.clone();
            with_taken[self.image[p]] = true;
            with.bound = self.bound(with.value, with.next, &with.blocked, &with_taken);
            if with.value > best_value + EPS {
                best_value = with.value;
                best = with.chosen.clone();
            }

            let mut without = node;
            without.blocked[p] = true;
            without.next = p + 1;
            without.bound = self.bound(without.value, without.next, &without.blocked, &taken);

            for child in [with, without] {
                if child.bound > best_value + EPS {
                    heap.push(child);
                }
            }
        }
        (best, true)
    }
}

fn components(model: &MilpModel, collects: &[Collect]) -> Vec<Component> {
    let n = model.variable_count();
    let mut adjacency = vec![Vec::new(); n];
    for (_, vars) in &model.image_rows {
        for (a, &k) in vars.iter().enumerate() {
            for &l in &vars[a + 1..] {
                adjacency[k].push(l);
                adjacency[l].push(k);
            }
        }
    }
    for &(k, l) in &model.exclusions {
        adjacency[k].push(l);
        adjacency[l].push(k);
    }

    let mut label = vec![usize::MAX; n];
    let mut out = Vec::new();
    for root in 0..n {
        if label[root] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![root];
        label[root] = id;
        let mut k = 0;
        while k < members.len() {
            let v = members[k];
            for &w in &adjacency[v] {
                if label[w] == usize::MAX {
                    label[w] = id;
                    members.push(w);
                }
            }
            k += 1;
        }

        // Reward density first, then start time, then id.
        let density = |v: usize| model.objective[v] / (1.0 + adjacency[v].len() as f64);
        members.sort_by(|&a, &b| {
            density(b)
                .total_cmp(&density(a))
                .then(collects[a].t_start.cmp(&collects[b].t_start))
                .then(a.cmp(&b))
        });
        let mut position = std::collections::HashMap::new();
        for (p, &v) in members.iter().enumerate() {
            position.insert(v, p);
        }
        let mut images = std::collections::BTreeMap::new();
        let image: Vec<usize> = members
            .iter()
            .map(|&v| {
                let next = images.len();
                *images.entry(collects[v].image_id).or_insert(next)
            })
            .collect();
        let conflicts = members
            .iter()
            .map(|&v| adjacency[v].iter().map(|w| position[w]).collect())
            .collect();
        out.push(Component {
            reward: members.iter().map(|&v| model.objective[v]).collect(),
            vars: members,
            image,
            conflicts,
            image_count: images.len(),
        });
    }
    out
}

/// Exact selection by branch and bound, one conflict component at a time.
///
/// With `time_limit_s = 0` the greedy incumbent is returned. If the limit
/// is reached the best incumbent found so far is returned with
/// `optimal = Some(false)`.
pub fn plan_milp(
    collects: &[Collect],
    rewards: &[f64],
    cs: &ConstraintSet,
    time_limit_s: f64,
) -> Result<(TaskPlan, MilpOutcome)> {
    let started = Instant::now();
    if !(time_limit_s >= 0.0) {
        return Err(Error::Config(format!("time limit {time_limit_s} must be non-negative")));
    }
    let model = MilpModel::build(collects, rewards, cs)?;
    let deadline = if time_limit_s.is_finite() {
        Some(started + Duration::from_secs_f64(time_limit_s))
    } else {
        None
    };
    let parts = components(&model, collects);
    let mut outcome = MilpOutcome {
        components: parts.len(),
        optimal: time_limit_s > 0.0,
        ..Default::default()
    };
    let mut selected = Vec::new();
    for part in &parts {
        let (chosen, done) = part.solve(deadline, &mut outcome.nodes);
        outcome.optimal &= done;
        selected.extend(chosen.into_iter().map(|p| part.vars[p]));
    }
    debug_assert!(model.is_feasible(&selected));
    let mut plan = TaskPlan::from_collects("milp", &selected, collects, rewards);
    plan.optimal = Some(outcome.optimal);
    plan.runtime_s = started.elapsed().as_secs_f64();
    Ok((plan, outcome))
}
