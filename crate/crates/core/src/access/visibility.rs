use std::io::Write;

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ImageTarget;
use crate::astro::constants::R_EARTH_EQ;
use crate::astro::{eci_to_ecef, Epoch, StateVector};
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};

/// Boundary bisection stops once the bracket is this narrow (s).
pub const REFINE_TOLERANCE_S: f64 = 0.01;
/// Windows shorter than this are discarded (s).
pub const MIN_WINDOW_S: f64 = 1.0;

/// A maximal interval of visibility of one image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Opportunity {
    pub image_id: usize,
    pub t_s: Epoch,
    pub t_e: Epoch,
}

impl Opportunity {
    pub fn duration(&self) -> f64 {
        self.t_e - self.t_s
    }

    pub fn midpoint(&self) -> Epoch {
        self.t_s + 0.5 * self.duration()
    }

    /// True when `[start, end]` lies inside this window, up to
    /// [`TIME_TOLERANCE_S`].
    pub fn contains(&self, start: Epoch, end: Epoch) -> bool {
        start - self.t_s >= -TIME_TOLERANCE_S && self.t_e - end >= -TIME_TOLERANCE_S
    }
}

/// Resolution of serialized epochs (s). Window containment allows this
/// much slack so that plans read back from disk score like the originals.
pub const TIME_TOLERANCE_S: f64 = 1e-6;

/// Angle between nadir and the line of sight to `target`, both Earth-fixed.
pub fn look_angle(sat: &Vector3<f64>, target: &Vector3<f64>) -> f64 {
    (target - sat).angle(&-sat)
}

/// Signed visibility margin (rad): non-negative exactly when the target is
/// visible. The smaller of the look-angle slack and the elevation of the
/// satellite above the horizon dip of the spherical Earth at the target.
pub fn visibility_margin(sat: &Vector3<f64>, target: &Vector3<f64>, look_angle_max: f64) -> f64 {
    let look = look_angle_max - look_angle(sat, target);
    // Targets below the sphere are lifted onto it radially.
    let tr = target.norm();
    let lifted = if tr < R_EARTH_EQ { target * (R_EARTH_EQ / tr) } else { *target };
    let los = sat - lifted;
    let up = lifted / lifted.norm();
    let elevation = (los.dot(&up) / los.norm()).clamp(-1.0, 1.0).asin();
    let dip = (R_EARTH_EQ / lifted.norm()).min(1.0).acos();
    look.min(elevation + dip)
}

/// Line of sight clear of the Earth sphere and within the look-angle limit.
pub fn visibility(state: &StateVector, target: &ImageTarget) -> bool {
    let sat = eci_to_ecef(state.epoch, &state.position);
    visibility_margin(&sat, target.center_ecef(), target.look_angle_max) >= 0.0
}

struct Scan<'a> {
    traj: &'a Trajectory,
    target: &'a ImageTarget,
}

impl Scan<'_> {
    fn margin(&self, offset: f64) -> f64 {
        let epoch = self.traj.start() + offset;
        let state = self.traj.state_at(epoch).expect("offset inside trajectory");
        let sat = eci_to_ecef(epoch, &state.position);
        visibility_margin(&sat, self.target.center_ecef(), self.target.look_angle_max)
    }

    /// Visible-side end of the bracket `[inside, outside]`.
    fn bisect(&self, mut inside: f64, mut outside: f64) -> f64 {
        while (outside - inside).abs() > 0.5 * REFINE_TOLERANCE_S {
            let mid = 0.5 * (inside + outside);
            if self.margin(mid) >= 0.0 {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    }

    /// Golden-section search for the largest margin in `[a, b]`.
    fn peak(&self, mut a: f64, mut b: f64) -> (f64, f64) {
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - g * (b - a);
        let mut x2 = a + g * (b - a);
        let mut f1 = self.margin(x1);
        let mut f2 = self.margin(x2);
        while b - a > 1e-3 {
            if f1 < f2 {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = self.margin(x2);
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = self.margin(x1);
            }
        }
        if f1 > f2 {
            (x1, f1)
        } else {
            (x2, f2)
        }
    }
}

/// Margins this far below zero at both ends of a step cannot hide a window.
const PEAK_SEARCH_THRESHOLD: f64 = 0.1;

/// Windows of one target, ordered by start.
pub fn find_opportunities_for(traj: &Trajectory, target: &ImageTarget) -> Vec<Opportunity> {
    let scan = Scan { traj, target };
    let t0 = traj.start();
    let offsets: Vec<f64> = traj.states().iter().map(|s| s.epoch - t0).collect();
    let margins: Vec<f64> = traj
        .states()
        .iter()
        .map(|s| visibility_margin(&eci_to_ecef(s.epoch, &s.position), target.center_ecef(), target.look_angle_max))
        .collect();

    let mut raw: Vec<(f64, f64)> = Vec::new();
    let mut open = if margins[0] >= 0.0 { Some(0.0) } else { None };
    for k in 0..offsets.len().saturating_sub(1) {
        let (a, b) = (offsets[k], offsets[k + 1]);
        let (ma, mb) = (margins[k], margins[k + 1]);
        match (ma >= 0.0, mb >= 0.0) {
            (true, false) => {
                let end = scan.bisect(a, b);
                raw.push((open.take().unwrap_or(a), end));
            }
            (false, true) => open = Some(scan.bisect(b, a)),
            (false, false) if ma.max(mb) > -PEAK_SEARCH_THRESHOLD => {
                // A short pass can rise above zero between two invisible nodes.
                let h = 1e-3 * (b - a);
                let rising = scan.margin(a + h) > ma;
                let falling = scan.margin(b - h) > mb;
                if rising && falling {
                    let (tp, mp) = scan.peak(a, b);
                    if mp >= 0.0 {
                        raw.push((scan.bisect(tp, a), scan.bisect(tp, b)));
                    }
                }
            }
            _ => {}
        }
    }
    if let Some(start) = open {
        raw.push((start, *offsets.last().unwrap()));
    }

    raw.into_iter()
        .filter(|(s, e)| e - s >= MIN_WINDOW_S)
        .map(|(s, e)| Opportunity {
            image_id: target.id,
            t_s: t0 + s,
            t_e: t0 + e,
        })
        .collect()
}

/// Windows for every target, indexed like `targets`. Targets are searched
/// in parallel.
pub fn find_opportunities(traj: &Trajectory, targets: &[ImageTarget]) -> Vec<Vec<Opportunity>> {
    targets.par_iter().map(|t| find_opportunities_for(traj, t)).collect()
}

/// CSV with header `image_id,t_start,t_end,duration_s`.
pub fn write_opportunities_csv<W: Write>(writer: W, windows: &[Vec<Opportunity>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["image_id", "t_start", "t_end", "duration_s"])?;
    for o in windows.iter().flatten() {
        w.write_record([
            o.image_id.to_string(),
            o.t_s.to_iso8601(),
            o.t_e.to_iso8601(),
            format!("{:.3}", o.duration()),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<windows csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::astro::{ecef_to_eci, GeodeticPoint};

    fn state_over(lat: f64, lon: f64, alt: f64) -> (StateVector, Vector3<f64>) {
        let e = Epoch::from_calendar(2026, 3, 20, 0, 0, 0.0).unwrap();
        let ground = GeodeticPoint::from_degrees(lat, lon, 0.0).unwrap().to_ecef();
        let sat = ground.normalize() * (ground.norm() + alt);
        (StateVector::new(e, ecef_to_eci(e, &sat), Vector3::zeros()), sat)
    }

    fn target(lat: f64, lon: f64) -> ImageTarget {
        ImageTarget::with_defaults(0, GeodeticPoint::from_degrees(lat, lon, 0.0).unwrap())
    }

    #[test]
    fn sub_satellite_point_is_visible() {
        let (s, _) = state_over(30.0, 40.0, 550e3);
        assert!(visibility(&s, &target(30.0, 40.0)));
    }

    #[test]
    fn antipode_is_occulted() {
        let (s, _) = state_over(30.0, 40.0, 550e3);
        assert!(!visibility(&s, &target(-30.0, -140.0)));
        let wide = ImageTarget::new(0, GeodeticPoint::from_degrees(-30.0, -140.0, 0.0).unwrap(), 1.0, 1.5, 10.0).unwrap();
        assert!(!visibility(&s, &wide));
    }

    #[test]
    fn horizon_limits_wide_look_angles() {
        // 88° off-nadir is far beyond the horizon from 550 km (about 67°).
        let (s, sat) = state_over(0.0, 0.0, 550e3);
        let t = ImageTarget::new(0, GeodeticPoint::from_degrees(0.0, 30.0, 0.0).unwrap(), 1.0, 88f64.to_radians(), 10.0).unwrap();
        assert!(look_angle(&sat, t.center_ecef()) < 88f64.to_radians());
        assert!(!visibility(&s, &t));
    }

    #[test]
    fn ground_sweep_flips_once() {
        let (s, _) = state_over(10.0, 20.0, 550e3);
        let mut flips = 0;
        let mut prev = true;
        for k in 0..400 {
            let v = visibility(&s, &target(10.0, 20.0 + 0.05 * k as f64));
            if v != prev {
                flips += 1;
            }
            prev = v;
        }
        assert_eq!(flips, 1);
        assert!(!prev);
    }
}
