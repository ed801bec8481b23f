//! Earth-observation satellite tasking under orbit-prediction uncertainty.
//!
//! The pipeline runs from orbit propagation through imaging-window search,
//! Monte Carlo characterization of window shifts, three planners (longest
//! path on a collect graph, binary branch-and-bound, and MDP forward
//! search) to replay of plans against sampled true trajectories.

pub mod access;
pub mod astro;
pub mod dynamics;
mod error;
pub mod evaluation;
pub mod pipeline;
pub mod planners;
pub mod scenario;
pub mod uncertainty;

pub use error::{Error, Result};
