//! Non-geopotential perturbations: radiation pressure, third bodies and the
//! post-Newtonian correction.

use std::f64::consts::PI;

use nalgebra::Vector3;

use super::SpacecraftParams;
use crate::astro::constants::{AU, MU_EARTH, P_SUN, R_EARTH_EQ, R_SUN, SPEED_OF_LIGHT};

/// Fraction of the solar disk visible from `r` (1 = full sun, 0 = umbra),
/// treating Earth as a sphere of equatorial radius.
pub fn conical_shadow_factor(r: &Vector3<f64>, sun_pos: &Vector3<f64>) -> f64 {
    let to_sun = sun_pos - r;
    let d_sun = to_sun.norm();
    let d_earth = r.norm();
    let a = (R_SUN / d_sun).asin();
    let b = (R_EARTH_EQ / d_earth).asin();
    let c = ((-r).dot(&to_sun) / (d_earth * d_sun)).clamp(-1.0, 1.0).acos();

    if c >= a + b {
        1.0
    } else if c <= b - a {
        0.0
    } else if c <= a - b {
        // Earth disk entirely inside the Sun disk.
        1.0 - (b * b) / (a * a)
    } else {
        let x = (c * c + a * a - b * b) / (2.0 * c);
        let y = (a * a - x * x).max(0.0).sqrt();
        let overlap = a * a * (x / a).clamp(-1.0, 1.0).acos() + b * b * ((c - x) / b).clamp(-1.0, 1.0).acos() - c * y;
        (1.0 - overlap / (PI * a * a)).clamp(0.0, 1.0)
    }
}

/// Cannon-ball radiation pressure, scaled by the shadow factor and by the
/// inverse square of the Sun distance.
pub fn srp_acceleration(r: &Vector3<f64>, sun_pos: &Vector3<f64>, sc: &SpacecraftParams) -> Vector3<f64> {
    let nu = conical_shadow_factor(r, sun_pos);
    if nu == 0.0 {
        return Vector3::zeros();
    }
    let from_sun = r - sun_pos;
    let d = from_sun.norm();
    let pressure = P_SUN * (AU / d).powi(2);
    from_sun * (nu * pressure * sc.reflectivity_coefficient * sc.srp_area / sc.mass / d)
}

/// Differential (tidal) acceleration due to a point mass at `body_pos`.
pub fn third_body_acceleration(r: &Vector3<f64>, body_pos: &Vector3<f64>, mu_body: f64) -> Vector3<f64> {
    let d = body_pos - r;
    mu_body * (d / d.norm().powi(3) - body_pos / body_pos.norm().powi(3))
}

/// First-order post-Newtonian (Schwarzschild) correction for a central body
/// with gravitational parameter `mu`.
pub fn relativistic_correction_mu(r: &Vector3<f64>, v: &Vector3<f64>, mu: f64) -> Vector3<f64> {
    let rn = r.norm();
    let c2 = SPEED_OF_LIGHT * SPEED_OF_LIGHT;
    mu / (c2 * rn.powi(3)) * ((4.0 * mu / rn - v.norm_squared()) * r + 4.0 * r.dot(v) * v)
}

pub fn relativistic_correction(r: &Vector3<f64>, v: &Vector3<f64>) -> Vector3<f64> {
    relativistic_correction_mu(r, v, MU_EARTH)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::astro::constants::{MU_MOON, MU_SUN};

    const SUN: Vector3<f64> = Vector3::new(AU, 0.0, 0.0);
    const LEO: f64 = R_EARTH_EQ + 550e3;

    #[test]
    fn full_sun_and_umbra() {
        assert_eq!(conical_shadow_factor(&Vector3::new(LEO, 0.0, 0.0), &SUN), 1.0);
        assert_eq!(conical_shadow_factor(&Vector3::new(0.0, LEO, 0.0), &SUN), 1.0);
        assert_eq!(conical_shadow_factor(&Vector3::new(-LEO, 0.0, 0.0), &SUN), 0.0);
    }

    #[test]
    fn penumbra_is_continuous_and_monotone() {
        // Walk along the orbit from the terminator into the shadow.
        let mut prev = 1.0;
        let mut saw_partial = false;
        let steps = 20_000;
        for k in 0..=steps {
            let angle = PI / 2.0 + (PI / 2.0) * k as f64 / steps as f64;
            let r = Vector3::new(LEO * angle.cos(), LEO * angle.sin(), 0.0);
            let nu = conical_shadow_factor(&r, &SUN);
            assert!(nu <= prev + 1e-12, "not monotone at {angle}");
            assert!(prev - nu < 0.02, "jump at {angle}");
            if nu > 0.0 && nu < 1.0 {
                saw_partial = true;
            }
            prev = nu;
        }
        assert!(saw_partial);
        assert_eq!(prev, 0.0);
    }

    #[test]
    fn srp_points_away_from_sun() {
        let sc = SpacecraftParams::default();
        let r = Vector3::new(LEO, 0.0, 0.0);
        let a = srp_acceleration(&r, &SUN, &sc);
        let expected = P_SUN * (AU / (AU - LEO)).powi(2) * sc.reflectivity_coefficient * sc.srp_area / sc.mass;
        assert!(a.x < 0.0);
        assert!((a.norm() - expected).abs() / expected < 1e-12);
        assert_eq!(srp_acceleration(&-r, &SUN, &sc), Vector3::zeros());
    }

    #[test]
    fn third_body_vanishes_at_geocenter() {
        let moon = Vector3::new(3.8e8, 1.0e7, -2.0e7);
        assert_eq!(third_body_acceleration(&Vector3::zeros(), &moon, MU_MOON), Vector3::zeros());
    }

    #[test]
    fn moon_tide_at_leo_is_small() {
        let moon = Vector3::new(3.8e8, 0.0, 0.0);
        for r in [
            Vector3::new(LEO, 0.0, 0.0),
            Vector3::new(-LEO, 0.0, 0.0),
            Vector3::new(0.0, LEO, 0.0),
        ] {
            assert!(third_body_acceleration(&r, &moon, MU_MOON).norm() < 2e-5);
        }
    }

    #[test]
    fn third_body_matches_two_point_evaluation() {
        // Oracle: difference of the body's pull on the satellite and on Earth's center.
        let pull = |at: Vector3<f64>, body: Vector3<f64>, mu: f64| {
            let d = body - at;
            mu * d / d.norm().powi(3)
        };
        let sun = Vector3::new(-1.2e11, 8.0e10, 3.5e10);
        let r = Vector3::new(2.0e6, -6.0e6, 2.9e6);
        let a = third_body_acceleration(&r, &sun, MU_SUN);
        let oracle = pull(r, sun, MU_SUN) - pull(Vector3::zeros(), sun, MU_SUN);
        assert!((a - oracle).norm() <= 1e-9 * oracle.norm() + 1e-18);
        // Antisymmetry about the geocenter to first order.
        let b = third_body_acceleration(&-r, &sun, MU_SUN);
        assert!((a + b).norm() < 1e-3 * a.norm());
    }

    #[test]
    fn relativity_at_leo() {
        let v = (MU_EARTH / LEO).sqrt();
        let a = relativistic_correction(&Vector3::new(LEO, 0.0, 0.0), &Vector3::new(0.0, v, 0.0));
        assert!((1e-9..=1e-7).contains(&a.norm()), "{}", a.norm());
    }

    #[test]
    fn relativity_formula_oracle_and_mu_scaling() {
        let r: Vector3<f64> = Vector3::new(4.1e6, -3.3e6, 4.0e6);
        let v: Vector3<f64> = Vector3::new(2.1e3, 6.6e3, 1.4e3);
        let direct = |mu: f64| {
            let rn = r.norm();
            let c2 = SPEED_OF_LIGHT.powi(2);
            let radial = (4.0 * mu / rn - v.dot(&v)) * mu / (c2 * rn.powi(3));
            let along = 4.0 * r.dot(&v) * mu / (c2 * rn.powi(3));
            r * radial + v * along
        };
        for mu in [MU_EARTH, 2.0 * MU_EARTH] {
            let a = relativistic_correction_mu(&r, &v, mu);
            assert!((a - direct(mu)).norm() <= 1e-12 * a.norm());
        }
    }

    #[test]
    fn relativity_zero_velocity_is_radial() {
        let r = Vector3::new(5.0e6, 3.0e6, -2.0e6);
        let a = relativistic_correction(&r, &Vector3::zeros());
        assert!(a.cross(&r).norm() <= 1e-12 * a.norm() * r.norm());
        assert!(a.dot(&r) > 0.0);
    }
}
