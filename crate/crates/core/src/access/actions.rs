use std::fmt;
use std::sync::Arc;

use super::{slew_feasible, Collect};
use crate::astro::Epoch;
use crate::error::{Error, Result};
use crate::planners::{Action, MdpState};

/// A transition predicate `f_c(s_t, s_{t+1})` evaluated for taking `next`
/// from `state`, whose most recent collect is `last`.
pub trait ActionConstraint: Send + Sync {
    fn name(&self) -> &'static str;
    fn allows(&self, state: &MdpState, last: Option<&Collect>, next: &Collect, cs: &ConstraintSet) -> bool;
}

/// Next collect may not start before the previous one ends.
#[derive(Debug, Clone, Copy)]
pub struct Causality;

impl ActionConstraint for Causality {
    fn name(&self) -> &'static str {
        "causality"
    }

    fn allows(&self, _: &MdpState, last: Option<&Collect>, next: &Collect, _: &ConstraintSet) -> bool {
        last.is_none_or(|l| next.t_start >= l.t_end)
    }
}

/// The slew from the previous collect fits in the gap.
#[derive(Debug, Clone, Copy)]
pub struct SlewRate;

impl ActionConstraint for SlewRate {
    fn name(&self) -> &'static str {
        "slew_rate"
    }

    fn allows(&self, _: &MdpState, last: Option<&Collect>, next: &Collect, cs: &ConstraintSet) -> bool {
        last.is_none_or(|l| slew_feasible(l, next, cs.max_slew_rate))
    }
}

/// An image already collected earns nothing more.
#[derive(Debug, Clone, Copy)]
pub struct UniqueImage;

impl ActionConstraint for UniqueImage {
    fn name(&self) -> &'static str {
        "unique_image"
    }

    fn allows(&self, state: &MdpState, _: Option<&Collect>, next: &Collect, _: &ConstraintSet) -> bool {
        !state.is_collected(next.image_id)
    }
}

#[derive(Clone)]
pub struct ConstraintSet {
    /// rad/s
    pub max_slew_rate: f64,
    /// Planning lookahead `h` (s).
    pub lookahead: f64,
    pub constraints: Vec<Arc<dyn ActionConstraint>>,
}

impl fmt::Debug for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConstraintSet")
            .field("max_slew_rate", &self.max_slew_rate)
            .field("lookahead", &self.lookahead)
            .field("constraints", &self.constraints.iter().map(|c| c.name()).collect::<Vec<_>>())
            .finish()
    }
}

impl ConstraintSet {
    pub fn new(max_slew_rate: f64, lookahead: f64, constraints: Vec<Arc<dyn ActionConstraint>>) -> Result<Self> {
        if !(max_slew_rate > 0.0) {
            return Err(Error::Config(format!("max slew rate {max_slew_rate} must be positive")));
        }
        if !(lookahead > 0.0) {
            return Err(Error::Config(format!("lookahead {lookahead} must be positive")));
        }
        Ok(Self {
            max_slew_rate,
            lookahead,
            constraints,
        })
    }

    /// Causality, slew rate and unique-image constraints.
    pub fn standard(max_slew_rate: f64, lookahead: f64) -> Result<Self> {
        Self::new(
            max_slew_rate,
            lookahead,
            vec![Arc::new(Causality), Arc::new(SlewRate), Arc::new(UniqueImage)],
        )
    }

    pub fn allows(&self, state: &MdpState, last: Option<&Collect>, next: &Collect) -> bool {
        self.constraints.iter().all(|c| c.allows(state, last, next, self))
    }
}

/// Index range of collects starting in `(time, time + lookahead]`.
fn horizon_range(time: Epoch, collects: &[Collect], lookahead: f64) -> (usize, usize) {
    let lo = collects.partition_point(|c| c.t_start <= time);
    let hi = lo + collects[lo..].partition_point(|c| c.t_start - time <= lookahead);
    (lo, hi)
}

/// `A(s)`: NIL followed by every collect in the lookahead that passes all
/// constraints, in id order. `collects` must be sorted by start time with
/// `collects[k].id == k`.
pub fn action_space(s: &MdpState, collects: &[Collect], cs: &ConstraintSet) -> Vec<Action> {
    let last = s.last_collect.map(|id| &collects[id]);
    let (lo, hi) = horizon_range(s.time, collects, cs.lookahead);
    let mut actions = vec![Action::Nil];
    actions.extend(
        collects[lo..hi]
            .iter()
            .filter(|c| cs.allows(s, last, c))
            .map(|c| Action::Collect(c.id)),
    );
    actions
}

/// Effect of NIL: wait until the first collect beyond the lookahead is just
/// inside it. `None` when nothing lies beyond the lookahead (terminal).
pub fn nil_successor(s: &MdpState, collects: &[Collect], cs: &ConstraintSet) -> Option<MdpState> {
    let (_, hi) = horizon_range(s.time, collects, cs.lookahead);
    let next = collects.get(hi)?;
    let lead = (0.5 * cs.lookahead).min(1e-3);
    let mut out = s.clone();
    out.time = next.t_start - lead;
    Some(out)
}
