#![allow(dead_code)]

pub mod oracles;

use nalgebra::Vector3;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sattask::access::{discretize, find_opportunities, Collect, ImageTarget, Opportunity};
use sattask::astro::constants::R_EARTH_EQ;
use sattask::astro::{Epoch, StateVector};
use sattask::dynamics::{propagate_rk4, ForceModelConfig, SpacecraftParams, Trajectory};
use sattask::scenario::generate_targets;
use sattask::uncertainty::PropagationSetup;

pub const SLEW_RATE: f64 = std::f64::consts::PI / 180.0;

pub fn epoch0() -> Epoch {
    Epoch::from_calendar(2026, 3, 20, 0, 0, 0.0).unwrap()
}

/// 550 km circular polar orbit.
pub fn polar_state() -> StateVector {
    StateVector::from_keplerian(epoch0(), R_EARTH_EQ + 550.0e3, 0.0, 90f64.to_radians(), 0.0, 0.0, 0.0)
}

pub fn setup(duration: f64) -> PropagationSetup {
    PropagationSetup {
        spacecraft: SpacecraftParams::default(),
        force_model: ForceModelConfig::default(),
        duration,
        step: 10.0,
    }
}

pub fn propagate(state: &StateVector, duration: f64) -> Trajectory {
    let s = setup(duration);
    propagate_rk4(state, &s.spacecraft, &s.force_model, s.duration, s.step).unwrap()
}

/// Random targets seen from the polar orbit, with their windows and collects.
pub struct Problem {
    pub targets: Vec<ImageTarget>,
    pub traj: Trajectory,
    pub windows: Vec<Vec<Opportunity>>,
    pub collects: Vec<Collect>,
}

pub fn problem(targets: usize, seed: u64, duration: f64) -> Problem {
    let targets = generate_targets(targets, seed).unwrap();
    let traj = propagate(&polar_state(), duration);
    let windows = find_opportunities(&traj, &targets);
    let flat: Vec<Opportunity> = windows.iter().flatten().copied().collect();
    let collects = discretize(&flat, &targets, &traj).unwrap();
    Problem {
        targets,
        traj,
        windows,
        collects,
    }
}

fn unit_in_cone(rng: &mut ChaCha8Rng, half_angle: f64) -> Vector3<f64> {
    let z: f64 = rng.random_range(half_angle.cos()..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).sqrt();
    Vector3::new(s * phi.cos(), s * phi.sin(), z)
}

/// Synthetic collects: `n` ten-second collects of `images` images starting
/// uniformly in `[0, span]` s, pointing within 40 degrees of one axis so
/// that slews take 0 to 80 s at one degree per second.
pub fn random_collects(rng: &mut ChaCha8Rng, n: usize, images: usize, span: f64) -> Vec<Collect> {
    let mut out: Vec<Collect> = (0..n)
        .map(|_| {
            let start = rng.random_range(0.0..span);
            let p = unit_in_cone(rng, 40f64.to_radians());
            let q = (p + 0.05 * unit_in_cone(rng, std::f64::consts::PI)).normalize();
            Collect {
                id: 0,
                image_id: rng.random_range(0..images),
                t_start: Epoch::J2000 + start,
                t_end: Epoch::J2000 + start + 10.0,
                pointing_start: p,
                pointing_end: q,
            }
        })
        .collect();
    out.sort_by(|a, b| a.t_start.cmp(&b.t_start).then(a.image_id.cmp(&b.image_id)));
    for (k, c) in out.iter_mut().enumerate() {
        c.id = k;
    }
    out
}

pub fn random_rewards(rng: &mut ChaCha8Rng, images: usize) -> Vec<f64> {
    (0..images).map(|_| rng.random_range(1..=5) as f64).collect()
}

/// Slew check written out independently of the library.
pub fn can_follow(a: &Collect, b: &Collect, rate: f64) -> bool {
    let gap = b.t_start - a.t_end;
    gap >= 0.0 && a.pointing_end.angle(&b.pointing_start) <= rate * gap
}
