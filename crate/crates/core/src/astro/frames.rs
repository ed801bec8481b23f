//! Earth-fixed / inertial rotation.
//!
//! Earth orientation is a single rotation about the inertial z-axis by the
//! Earth rotation angle, advancing linearly from its J2000 value. Precession,
//! nutation and polar motion are not modeled.

use std::f64::consts::TAU;

use nalgebra::{Rotation3, Vector3};

use super::constants::{EARTH_ROTATION_ANGLE_J2000, OMEGA_EARTH};
use super::Epoch;

/// Earth rotation angle in `[0, 2π)`.
pub fn earth_rotation_angle(epoch: Epoch) -> f64 {
    // Reduce the whole-day part first so large epochs keep full precision.
    let t = epoch - Epoch::J2000;
    let days = (t / 86_400.0).floor();
    let rem = t - days * 86_400.0;
    let per_day = (OMEGA_EARTH * 86_400.0).rem_euclid(TAU);
    let theta = EARTH_ROTATION_ANGLE_J2000 + (days * per_day).rem_euclid(TAU) + OMEGA_EARTH * rem;
    theta.rem_euclid(TAU)
}

fn rotation(epoch: Epoch) -> Rotation3<f64> {
    Rotation3::from_axis_angle(&Vector3::z_axis(), -earth_rotation_angle(epoch))
}

pub fn eci_to_ecef(epoch: Epoch, r_eci: &Vector3<f64>) -> Vector3<f64> {
    rotation(epoch) * r_eci
}

pub fn ecef_to_eci(epoch: Epoch, r_ecef: &Vector3<f64>) -> Vector3<f64> {
    rotation(epoch).inverse() * r_ecef
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SIDEREAL_DAY: f64 = 86_164.0905;

    #[test]
    fn spin_axis_is_fixed() {
        let r = Vector3::new(0.0, 0.0, 7.0e6);
        for k in 0..10 {
            let e = Epoch::J2000 + 12_345.6 * k as f64;
            assert_eq!(eci_to_ecef(e, &r), r);
        }
    }

    #[test]
    fn sidereal_day_returns_orientation() {
        let r = Vector3::new(6.9e6, -1.2e6, 3.0e5);
        let e = Epoch::from_calendar(2026, 3, 20, 0, 0, 0.0).unwrap();
        let a = eci_to_ecef(e, &r);
        let b = eci_to_ecef(e + SIDEREAL_DAY, &r);
        assert!(a.angle(&b) < 1e-3);
    }

    #[test]
    fn rotates_eastward() {
        // An inertially fixed point drifts westward (negative longitude rate) in the Earth frame.
        let r = Vector3::new(7.0e6, 0.0, 0.0);
        let e = Epoch::J2000;
        let a = eci_to_ecef(e, &r);
        let b = eci_to_ecef(e + 60.0, &r);
        let dlon = b.y.atan2(b.x) - a.y.atan2(a.x);
        assert!((dlon + OMEGA_EARTH * 60.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn rotation_preserves_norm(
            x in -1e8f64..1e8, y in -1e8f64..1e8, z in -1e8f64..1e8, t in -1e9f64..1e9
        ) {
            let r = Vector3::new(x, y, z);
            prop_assume!(r.norm() > 1.0);
            let e = Epoch::from_j2000_seconds(t);
            let out = eci_to_ecef(e, &r);
            prop_assert!(((out.norm() - r.norm()) / r.norm()).abs() < 1e-9);
            let back = ecef_to_eci(e, &out);
            prop_assert!((back - r).norm() / r.norm() < 1e-12);
        }
    }
}
