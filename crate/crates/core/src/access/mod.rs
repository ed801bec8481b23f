//! Imaging targets, visibility windows, collects and the action space.

mod actions;
mod collects;
mod visibility;

pub use actions::{
    action_space, nil_successor, ActionConstraint, Causality, ConstraintSet, SlewRate, UniqueImage,
};
pub use collects::{discretize, pointing_vector, read_collects_csv, slew_feasible, write_collects_csv, Collect};
pub use visibility::{
    find_opportunities, find_opportunities_for, look_angle, visibility, visibility_margin, write_opportunities_csv,
    Opportunity, MIN_WINDOW_S, REFINE_TOLERANCE_S, TIME_TOLERANCE_S,
};

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::astro::GeodeticPoint;
use crate::error::{Error, Result};

/// Off-nadir limit used when a target does not specify one.
pub const DEFAULT_LOOK_ANGLE_MAX_DEG: f64 = 55.0;
/// Collect length used when a target does not specify one (s).
pub const DEFAULT_COLLECT_DURATION_S: f64 = 10.0;

/// A requested ground image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TargetRecord", into = "TargetRecord")]
pub struct ImageTarget {
    pub id: usize,
    pub center: GeodeticPoint,
    pub reward: f64,
    /// Maximum off-nadir look angle (rad).
    pub look_angle_max: f64,
    /// Seconds.
    pub collect_duration: f64,
    center_ecef: Vector3<f64>,
}

impl ImageTarget {
    pub fn new(id: usize, center: GeodeticPoint, reward: f64, look_angle_max: f64, collect_duration: f64) -> Result<Self> {
        if !(reward >= 0.0) || !reward.is_finite() {
            return Err(Error::InvalidInput(format!("target {id}: reward {reward} must be non-negative")));
        }
        if !(look_angle_max > 0.0 && look_angle_max < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidInput(format!(
                "target {id}: look angle limit {look_angle_max} rad outside (0, π/2)"
            )));
        }
        if !(collect_duration > 0.0) || !collect_duration.is_finite() {
            return Err(Error::InvalidInput(format!(
                "target {id}: collect duration {collect_duration} must be positive"
            )));
        }
        Ok(Self {
            id,
            center,
            reward,
            look_angle_max,
            collect_duration,
            center_ecef: center.to_ecef(),
        })
    }

    /// Unit reward, default look angle and collect duration.
    pub fn with_defaults(id: usize, center: GeodeticPoint) -> Self {
        Self::new(
            id,
            center,
            1.0,
            DEFAULT_LOOK_ANGLE_MAX_DEG.to_radians(),
            DEFAULT_COLLECT_DURATION_S,
        )
        .expect("defaults are valid")
    }

    pub fn center_ecef(&self) -> &Vector3<f64> {
        &self.center_ecef
    }
}

/// On-disk form of a target.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetRecord {
    id: usize,
    lat_deg: f64,
    lon_deg: f64,
    alt_m: f64,
    reward: f64,
    theta_max_deg: f64,
    collect_duration_s: f64,
}

impl TryFrom<TargetRecord> for ImageTarget {
    type Error = Error;

    fn try_from(r: TargetRecord) -> Result<Self> {
        let center = GeodeticPoint::from_degrees(r.lat_deg, r.lon_deg, r.alt_m)?;
        ImageTarget::new(r.id, center, r.reward, r.theta_max_deg.to_radians(), r.collect_duration_s)
    }
}

impl From<ImageTarget> for TargetRecord {
    fn from(t: ImageTarget) -> Self {
        Self {
            id: t.id,
            lat_deg: t.center.latitude.to_degrees(),
            lon_deg: t.center.longitude.to_degrees(),
            alt_m: t.center.altitude,
            reward: t.reward,
            theta_max_deg: t.look_angle_max.to_degrees(),
            collect_duration_s: t.collect_duration,
        }
    }
}

/// Target ids index the reward and collected-flag vectors, so they must be
/// exactly `0..n` in order.
pub fn validate_targets(targets: &[ImageTarget]) -> Result<()> {
    for (k, t) in targets.iter().enumerate() {
        if t.id != k {
            return Err(Error::InvalidInput(format!(
                "target at position {k} has id {}; ids must be 0..{} in order",
                t.id,
                targets.len()
            )));
        }
    }
    Ok(())
}

pub fn rewards(targets: &[ImageTarget]) -> Vec<f64> {
    targets.iter().map(|t| t.reward).collect()
}

pub fn read_targets_json<R: Read>(reader: R) -> Result<Vec<ImageTarget>> {
    let targets: Vec<ImageTarget> = serde_json::from_reader(reader)?;
    validate_targets(&targets)?;
    Ok(targets)
}

pub fn write_targets_json<W: Write>(writer: W, targets: &[ImageTarget]) -> Result<()> {
    serde_json::to_writer_pretty(writer, targets)?;
    Ok(())
}

pub fn load_targets(path: &Path) -> Result<Vec<ImageTarget>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_targets_json(std::io::BufReader::new(file))
}
