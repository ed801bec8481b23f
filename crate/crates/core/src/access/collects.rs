use std::io::{Read, Write};

use nalgebra::{Unit, Vector3};
use serde::{Deserialize, Serialize};

use super::{ImageTarget, Opportunity};
use crate::astro::{ecef_to_eci, Epoch};
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};

/// A fixed-length imaging interval inside an opportunity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Collect {
    pub id: usize,
    pub image_id: usize,
    pub t_start: Epoch,
    pub t_end: Epoch,
    /// Inertial unit vector from the satellite to the image center at `t_start`.
    pub pointing_start: Vector3<f64>,
    pub pointing_end: Vector3<f64>,
}

impl Collect {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

/// Inertial line of sight from the satellite to `target` at `epoch`.
pub fn pointing_vector(traj: &Trajectory, target: &ImageTarget, epoch: Epoch) -> Option<Vector3<f64>> {
    let state = traj.state_at(epoch)?;
    let target_eci = ecef_to_eci(epoch, target.center_ecef());
    Some(Unit::new_normalize(target_eci - state.position).into_inner())
}

/// Splits each window into back-to-back collects anchored at its start;
/// a trailing remainder shorter than the collect duration is dropped.
///
/// The result is sorted by `(t_start, image_id)` and ids are assigned in
/// that order, so `collects[k].id == k`.
pub fn discretize(opps: &[Opportunity], targets: &[ImageTarget], traj: &Trajectory) -> Result<Vec<Collect>> {
    let mut out = Vec::new();
    for o in opps {
        let target = targets
            .get(o.image_id)
            .filter(|t| t.id == o.image_id)
            .ok_or_else(|| Error::InvalidInput(format!("window references unknown image {}", o.image_id)))?;
        let d = target.collect_duration;
        let count = ((o.t_e - o.t_s) / d + 1e-9).floor() as usize;
        for k in 0..count {
            let t_start = o.t_s + k as f64 * d;
            let t_end = t_start + d;
            let missing = || Error::InvalidInput(format!("collect at {t_start} outside trajectory"));
            out.push(Collect {
                id: 0,
                image_id: o.image_id,
                t_start,
                t_end,
                pointing_start: pointing_vector(traj, target, t_start).ok_or_else(missing)?,
                pointing_end: pointing_vector(traj, target, t_end).ok_or_else(missing)?,
            });
        }
    }
    out.sort_by(|a, b| a.t_start.cmp(&b.t_start).then(a.image_id.cmp(&b.image_id)));
    for (k, c) in out.iter_mut().enumerate() {
        c.id = k;
    }
    Ok(out)
}

/// Whether the satellite can finish `from`, slew at `max_slew_rate` (rad/s)
/// and be on target when `to` starts.
pub fn slew_feasible(from: &Collect, to: &Collect, max_slew_rate: f64) -> bool {
    if to.t_start < from.t_end {
        return false;
    }
    let gap = to.t_start - from.t_end;
    from.pointing_end.angle(&to.pointing_start) <= max_slew_rate * gap
}

#[derive(Debug, Serialize, Deserialize)]
struct CollectRow {
    id: usize,
    image_id: usize,
    t_start: Epoch,
    t_end: Epoch,
    start_x: f64,
    start_y: f64,
    start_z: f64,
    end_x: f64,
    end_y: f64,
    end_z: f64,
}

pub fn write_collects_csv<W: Write>(writer: W, collects: &[Collect]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for c in collects {
        w.serialize(CollectRow {
            id: c.id,
            image_id: c.image_id,
            t_start: c.t_start,
            t_end: c.t_end,
            start_x: c.pointing_start.x,
            start_y: c.pointing_start.y,
            start_z: c.pointing_start.z,
            end_x: c.pointing_end.x,
            end_y: c.pointing_end.y,
            end_z: c.pointing_end.z,
        })?;
    }
    w.flush().map_err(|e| Error::io("<collects csv>", e))?;
    Ok(())
}

pub fn read_collects_csv<R: Read>(reader: R) -> Result<Vec<Collect>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in r.deserialize() {
        let row: CollectRow = row?;
        if row.id != out.len() {
            return Err(Error::InvalidInput(format!("collect ids must be sequential, found {}", row.id)));
        }
        out.push(Collect {
            id: row.id,
            image_id: row.image_id,
            t_start: row.t_start,
            t_end: row.t_end,
            pointing_start: Vector3::new(row.start_x, row.start_y, row.start_z),
            pointing_end: Vector3::new(row.end_x, row.end_y, row.end_z),
        });
    }
    Ok(out)
}
