use nalgebra::Vector3;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sattask::access::Collect;
use sattask::astro::constants::R_EARTH_EQ;
use sattask::astro::Epoch;
use sattask::dynamics::GravityField;

use super::{can_follow, SLEW_RATE};

/// Heaviest path in the collect graph, by enumerating every path.
pub fn longest_path_oracle(collects: &[Collect], rewards: &[f64]) -> f64 {
    fn extend(collects: &[Collect], rewards: &[f64], last: usize, value: f64, best: &mut f64) {
        *best = best.max(value);
        for next in last + 1..collects.len() {
            let (a, b) = (&collects[last], &collects[next]);
            if a.image_id != b.image_id && can_follow(a, b, SLEW_RATE) {
                extend(collects, rewards, next, value + rewards[b.image_id], best);
            }
        }
    }
    let mut best = 0.0;
    for first in 0..collects.len() {
        extend(collects, rewards, first, rewards[collects[first].image_id], &mut best);
    }
    best
}

/// Best objective over all 2^n selections satisfying the per-image and
/// pairwise exclusion rows.
pub fn selection_oracle(collects: &[Collect], rewards: &[f64]) -> f64 {
    let n = collects.len();
    let mut best = 0.0f64;
    'mask: for mask in 0u32..(1 << n) {
        let chosen: Vec<&Collect> = (0..n).filter(|k| mask >> k & 1 == 1).map(|k| &collects[k]).collect();
        for (i, a) in chosen.iter().enumerate() {
            for b in &chosen[i + 1..] {
                let same = a.image_id == b.image_id;
                if same || !(can_follow(a, b, SLEW_RATE) || can_follow(b, a, SLEW_RATE)) {
                    continue 'mask;
                }
            }
        }
        best = best.max(chosen.iter().map(|c| rewards[c.image_id]).sum());
    }
    best
}

/// Best reward of a time-ordered, slew-feasible sequence with distinct images.
pub fn sequence_oracle(collects: &[Collect], rewards: &[f64]) -> f64 {
    let n = collects.len();
    let mut best = 0.0f64;
    'mask: for mask in 0u32..(1 << n) {
        let chosen: Vec<&Collect> = (0..n).filter(|k| mask >> k & 1 == 1).map(|k| &collects[k]).collect();
        let mut images = std::collections::BTreeSet::new();
        for (i, c) in chosen.iter().enumerate() {
            if !images.insert(c.image_id) || (i > 0 && !can_follow(chosen[i - 1], c, SLEW_RATE)) {
                continue 'mask;
            }
        }
        best = best.max(chosen.iter().map(|c| rewards[c.image_id]).sum());
    }
    best
}

/// Depth-limited value with every collect certain and an unbounded
/// lookahead: the sum of `R` over the visited states. With nothing left to
/// wait for, waiting is final and keeps the current `R`.
pub fn expectimax_oracle(
    collects: &[Collect],
    rewards: &[f64],
    time: Epoch,
    taken: &[bool],
    last: Option<usize>,
    depth: usize,
) -> f64 {
    if depth == 0 {
        return 0.0;
    }
    let r: f64 = rewards
        .iter()
        .zip(taken)
        .map(|(r, t)| if *t { *r } else { -*r })
        .sum();
    let mut best = r * depth as f64;
    for c in collects {
        let allowed = c.t_start > time
            && !taken[c.image_id]
            && last.is_none_or(|l| can_follow(&collects[l], c, SLEW_RATE));
        if allowed {
            let mut next = taken.to_vec();
            next[c.image_id] = true;
            best = best.max(r + expectimax_oracle(collects, rewards, c.t_end, &next, Some(c.id), depth - 1));
        }
    }
    best
}

/// Independent potential from fully normalized Legendre functions in
/// geocentric latitude/longitude. Returns the attraction potential U > 0.
pub fn legendre_potential(field: &GravityField, r: &Vector3<f64>, nmax: usize) -> f64 {
    let rn = r.norm();
    let sphi = r.z / rn;
    let cphi = (1.0 - sphi * sphi).sqrt();
    let lon = r.y.atan2(r.x);
    // p[n][m], fully normalized (geodesy convention).
    let mut p = vec![vec![0.0; nmax + 1]; nmax + 1];
    p[0][0] = 1.0;
    for m in 1..=nmax {
        let k = if m == 1 { 3f64.sqrt() } else { ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() };
        p[m][m] = k * cphi * p[m - 1][m - 1];
    }
    for m in 0..nmax {
        p[m + 1][m] = ((2 * m + 3) as f64).sqrt() * sphi * p[m][m];
    }
    for m in 0..=nmax {
        for n in (m + 2)..=nmax {
            let (nf, mf) = (n as f64, m as f64);
            let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
            let b = (((2.0 * nf + 1.0) * ((nf - 1.0).powi(2) - mf * mf)) / ((2.0 * nf - 3.0) * (nf * nf - mf * mf))).sqrt();
            p[n][m] = a * sphi * p[n - 1][m] - b * p[n - 2][m];
        }
    }
    let mut sum = 0.0;
    for n in 0..=nmax {
        let scale = (field.radius() / rn).powi(n as i32);
        for m in 0..=n {
            let (c, s) = field.normalized(n, m);
            let ml = m as f64 * lon;
            sum += scale * p[n][m] * (c * ml.cos() + s * ml.sin());
        }
    }
    field.gm() / rn * sum
}

pub fn random_point(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    let radius = R_EARTH_EQ + rng.random_range(200e3..2000e3);
    let z: f64 = rng.random_range(-0.98..0.98);
    let lon: f64 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    let c = (1.0 - z * z).sqrt();
    radius * Vector3::new(c * lon.cos(), c * lon.sin(), z)
}

pub fn central_gradient(f: impl Fn(&Vector3<f64>) -> f64, r: &Vector3<f64>, h: f64) -> Vector3<f64> {
    let mut g = Vector3::zeros();
    for k in 0..3 {
        let mut dr = Vector3::zeros();
        dr[k] = h;
        g[k] = (f(&(r + dr)) - f(&(r - dr))) / (2.0 * h);
    }
    g
}
