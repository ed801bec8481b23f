use std::io::{Read, Write};

use nalgebra::Vector3;

use super::{acceleration, ForceModelConfig, SpacecraftParams};
use crate::astro::{Epoch, StateVector};
use crate::error::{Error, Result};

/// States sampled at a fixed step, with cubic Hermite interpolation between
/// nodes. When the span is not a whole number of steps the final node sits
/// at the span end and the last interval is shorter.
#[derive(Debug, Clone)]
pub struct Trajectory {
    states: Vec<StateVector>,
    step: f64,
}

impl Trajectory {
    pub fn new(states: Vec<StateVector>, step: f64) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidInput("trajectory needs at least one state".into()));
        }
        if !(step > 0.0) {
            return Err(Error::InvalidInput(format!("step {step} must be positive")));
        }
        let t0 = states[0].epoch;
        let last = states.len() - 1;
        for (k, w) in states.windows(2).enumerate() {
            let dt = w[1].epoch - w[0].epoch;
            if !(dt > 0.0) {
                return Err(Error::InvalidInput("trajectory epochs must increase".into()));
            }
            let expected = step * k as f64;
            let spacing_ok = ((w[0].epoch - t0) - expected).abs() < 1e-6
                && ((k + 1 == last && dt <= step + 1e-6) || (dt - step).abs() < 1e-6);
            if !spacing_ok {
                return Err(Error::InvalidInput(format!("non-uniform spacing at node {k}")));
            }
        }
        Ok(Self { states, step })
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn start(&self) -> Epoch {
        self.states[0].epoch
    }

    pub fn end(&self) -> Epoch {
        self.states[self.states.len() - 1].epoch
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn covers(&self, epoch: Epoch) -> bool {
        epoch >= self.start() && epoch <= self.end()
    }

    /// Interpolated state, `None` outside the covered span.
    pub fn state_at(&self, epoch: Epoch) -> Option<StateVector> {
        if !self.covers(epoch) {
            return None;
        }
        let tau = epoch - self.start();
        let n = self.states.len();
        if n == 1 {
            return Some(self.states[0]);
        }
        let i = ((tau / self.step).floor() as usize).min(n - 2);
        let a = &self.states[i];
        let b = &self.states[i + 1];
        let h = b.epoch - a.epoch;
        let dt = epoch - a.epoch;
        if dt <= 0.0 {
            return Some(*a);
        }
        if dt >= h {
            return Some(*b);
        }
        let s = dt / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let position = a.position * h00 + a.velocity * (h10 * h) + b.position * h01 + b.velocity * (h11 * h);

        let d00 = 6.0 * s2 - 6.0 * s;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = -d00;
        let d11 = 3.0 * s2 - 2.0 * s;
        let velocity = (a.position * d00 + b.position * d01) / h + a.velocity * d10 + b.velocity * d11;

        Some(StateVector::new(epoch, position, velocity))
    }

    /// CSV with header `epoch,rx,ry,rz,vx,vy,vz`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["epoch", "rx", "ry", "rz", "vx", "vy", "vz"])?;
        for s in &self.states {
            w.write_record([
                s.epoch.to_iso8601(),
                s.position.x.to_string(),
                s.position.y.to_string(),
                s.position.z.to_string(),
                s.velocity.x.to_string(),
                s.velocity.y.to_string(),
                s.velocity.z.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<trajectory csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R, step: f64) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut states = Vec::new();
        for record in r.records() {
            let record = record?;
            if record.len() != 7 {
                return Err(Error::InvalidInput(format!("trajectory row has {} fields", record.len())));
            }
            let epoch = Epoch::from_iso8601(&record[0])?;
            let num = |k: usize| -> Result<f64> {
                record[k]
                    .trim()
                    .parse()
                    .map_err(|e| Error::InvalidInput(format!("trajectory field {k}: {e}")))
            };
            states.push(StateVector::new(
                epoch,
                Vector3::new(num(1)?, num(2)?, num(3)?),
                Vector3::new(num(4)?, num(5)?, num(6)?),
            ));
        }
        Self::new(states, step)
    }
}

fn derivative(
    t: Epoch,
    position: &Vector3<f64>,
    velocity: &Vector3<f64>,
    sc: &SpacecraftParams,
    cfg: &ForceModelConfig,
) -> Result<(Vector3<f64>, Vector3<f64>)> {
    let s = StateVector::new(t, *position, *velocity);
    Ok((*velocity, acceleration(t, &s, sc, cfg)?))
}

fn rk4_step(
    state: &StateVector,
    h: f64,
    sc: &SpacecraftParams,
    cfg: &ForceModelConfig,
) -> Result<StateVector> {
    let t = state.epoch;
    let (r, v) = (state.position, state.velocity);
    let (k1r, k1v) = derivative(t, &r, &v, sc, cfg)?;
    let (k2r, k2v) = derivative(t + 0.5 * h, &(r + 0.5 * h * k1r), &(v + 0.5 * h * k1v), sc, cfg)?;
    let (k3r, k3v) = derivative(t + 0.5 * h, &(r + 0.5 * h * k2r), &(v + 0.5 * h * k2v), sc, cfg)?;
    let (k4r, k4v) = derivative(t + h, &(r + h * k3r), &(v + h * k3v), sc, cfg)?;
    let next = StateVector::new(
        t + h,
        r + h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r),
        v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    );
    if !next.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite state at {}", next.epoch)));
    }
    Ok(next)
}

/// Classical fixed-step fourth-order Runge-Kutta.
///
/// Produces `floor(duration / step) + 1` uniformly spaced nodes, plus one
/// terminal node at `duration` when it is not a whole multiple of `step`.
pub fn propagate_rk4(
    initial: &StateVector,
    sc: &SpacecraftParams,
    cfg: &ForceModelConfig,
    duration: f64,
    step: f64,
) -> Result<Trajectory> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidInput(format!("step {step} must be positive")));
    }
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(Error::InvalidInput(format!("duration {duration} must be non-negative")));
    }
    cfg.validate()?;

    let full_steps = (duration / step + 1e-9).floor() as usize;
    let remainder = duration - full_steps as f64 * step;
    let mut states = Vec::with_capacity(full_steps + 2);
    states.push(*initial);
    let mut current = *initial;
    for k in 1..=full_steps {
        let mut next = rk4_step(&current, step, sc, cfg)?;
        // Pin node epochs to the grid to avoid drift from repeated addition.
        next.epoch = initial.epoch + k as f64 * step;
        states.push(next);
        current = next;
    }
    if remainder > 1e-9 {
        let mut last = rk4_step(&current, remainder, sc, cfg)?;
        last.epoch = initial.epoch + duration;
        states.push(last);
    }
    Trajectory::new(states, step)
}
