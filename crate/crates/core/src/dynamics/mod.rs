//! Force model and numerical propagation.

mod atmosphere;
mod forces;
mod gravity;
mod propagator;

pub use atmosphere::{bulge_factor, density_bounds, harris_priester_density, BULGE_EXPONENT};
pub use forces::{
    conical_shadow_factor, relativistic_correction, relativistic_correction_mu, srp_acceleration,
    third_body_acceleration,
};
pub use gravity::{gravity_spherical_harmonic, GravityField, BUNDLED_MAX_DEGREE};
pub use propagator::{propagate_rk4, Trajectory};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::astro::constants::{MU_EARTH, MU_MOON, MU_SUN, OMEGA_EARTH};
use crate::astro::{
    analytic_moon_position, analytic_sun_position, ecef_to_eci, ecef_to_geodetic, eci_to_ecef, Epoch,
    StateVector,
};
use crate::error::{Error, Result};

/// Lowest altitude the force model accepts; below it the orbit is treated as re-entered.
pub const REENTRY_ALTITUDE_M: f64 = 100.0e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpacecraftParams {
    /// kg
    pub mass: f64,
    /// m^2
    pub drag_area: f64,
    pub drag_coefficient: f64,
    /// m^2
    pub srp_area: f64,
    pub reflectivity_coefficient: f64,
}

impl Default for SpacecraftParams {
    fn default() -> Self {
        Self {
            mass: 100.0,
            drag_area: 1.0,
            drag_coefficient: 2.3,
            srp_area: 1.0,
            reflectivity_coefficient: 1.8,
        }
    }
}

impl SpacecraftParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.mass, self.drag_area, self.drag_coefficient, self.srp_area, self.reflectivity_coefficient]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if !positive {
            return Err(Error::Config("spacecraft parameters must be positive".into()));
        }
        if !(1.5..=3.0).contains(&self.drag_coefficient) {
            return Err(Error::Config(format!("drag coefficient {} outside [1.5, 3.0]", self.drag_coefficient)));
        }
        if !(1.0..=2.0).contains(&self.reflectivity_coefficient) {
            return Err(Error::Config(format!(
                "reflectivity coefficient {} outside [1.0, 2.0]",
                self.reflectivity_coefficient
            )));
        }
        Ok(())
    }
}

/// Selects which terms of the force model are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForceModelConfig {
    pub gravity_degree: usize,
    pub gravity_order: usize,
    pub drag: bool,
    pub srp: bool,
    pub third_body_sun: bool,
    pub third_body_moon: bool,
    pub relativity: bool,
}

impl Default for ForceModelConfig {
    fn default() -> Self {
        Self {
            gravity_degree: 10,
            gravity_order: 10,
            drag: true,
            srp: true,
            third_body_sun: true,
            third_body_moon: true,
            relativity: true,
        }
    }
}

impl ForceModelConfig {
    /// Point-mass gravity only.
    pub fn two_body() -> Self {
        Self {
            gravity_degree: 0,
            gravity_order: 0,
            drag: false,
            srp: false,
            third_body_sun: false,
            third_body_moon: false,
            relativity: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gravity_order > self.gravity_degree || self.gravity_degree > BUNDLED_MAX_DEGREE {
            return Err(Error::GravityDegree {
                degree: self.gravity_degree,
                order: self.gravity_order,
                max: BUNDLED_MAX_DEGREE,
            });
        }
        Ok(())
    }
}

/// Total inertial acceleration (m/s^2) of the spacecraft.
///
/// With every perturbation disabled and degree 0 this is exactly the
/// point-mass term `-μ r / |r|^3`.
pub fn acceleration(
    epoch: Epoch,
    state: &StateVector,
    sc: &SpacecraftParams,
    cfg: &ForceModelConfig,
) -> Result<Vector3<f64>> {
    let r = &state.position;
    let v = &state.velocity;
    let r_ecef = eci_to_ecef(epoch, r);
    let geo = ecef_to_geodetic(&r_ecef)?;
    if !(geo.altitude >= REENTRY_ALTITUDE_M) {
        return Err(Error::Reentry {
            epoch: epoch.to_iso8601(),
            altitude_m: geo.altitude,
        });
    }

    let mut acc = if cfg.gravity_degree < 2 {
        -MU_EARTH * r / r.norm().powi(3)
    } else {
        ecef_to_eci(
            epoch,
            &gravity_spherical_harmonic(&r_ecef, cfg.gravity_degree, cfg.gravity_order)?,
        )
    };

    let needs_sun = cfg.drag || cfg.srp || cfg.third_body_sun;
    let sun = if needs_sun { analytic_sun_position(epoch) } else { Vector3::zeros() };

    if cfg.drag && geo.altitude <= atmosphere::MAX_ALTITUDE_M {
        let sun_ecef = eci_to_ecef(epoch, &sun);
        let rho = harris_priester_density(&r_ecef, &sun_ecef)?;
        let v_rel = v - Vector3::new(0.0, 0.0, OMEGA_EARTH).cross(r);
        acc -= 0.5 * sc.drag_coefficient * sc.drag_area / sc.mass * rho * v_rel.norm() * v_rel;
    }
    if cfg.srp {
        acc += srp_acceleration(r, &sun, sc);
    }
    if cfg.third_body_sun {
        acc += third_body_acceleration(r, &sun, MU_SUN);
    }
    if cfg.third_body_moon {
        acc += third_body_acceleration(r, &analytic_moon_position(epoch), MU_MOON);
    }
    if cfg.relativity {
        acc += relativistic_correction(r, v);
    }
    Ok(acc)
}

/// Drag acceleration alone, exposed for inspection.
pub fn drag_acceleration(epoch: Epoch, state: &StateVector, sc: &SpacecraftParams) -> Result<Vector3<f64>> {
    let r = &state.position;
    let r_ecef = eci_to_ecef(epoch, r);
    let sun_ecef = eci_to_ecef(epoch, &analytic_sun_position(epoch));
    let rho = harris_priester_density(&r_ecef, &sun_ecef)?;
    let v_rel = state.velocity - Vector3::new(0.0, 0.0, OMEGA_EARTH).cross(r);
    Ok(-0.5 * sc.drag_coefficient * sc.drag_area / sc.mass * rho * v_rel.norm() * v_rel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::astro::constants::R_EARTH_EQ;

    fn leo_state() -> StateVector {
        let e = Epoch::from_calendar(2026, 3, 20, 0, 0, 0.0).unwrap();
        StateVector::from_keplerian(e, R_EARTH_EQ + 550e3, 0.0, 97.6f64.to_radians(), 0.3, 0.0, 1.1)
    }

    #[test]
    fn point_mass_by_hand() {
        let e = Epoch::J2000;
        let s = StateVector::new(e, Vector3::new(6_928_137.0, 0.0, 0.0), Vector3::new(0.0, 7585.0, 0.0));
        let a = acceleration(e, &s, &SpacecraftParams::default(), &ForceModelConfig::two_body()).unwrap();
        assert!((a.x + 8.3048).abs() < 1e-3);
        assert_eq!(a.y, 0.0);
        assert_eq!(a.z, 0.0);
        assert_eq!(a, -MU_EARTH * s.position / s.position.norm().powi(3));
    }

    #[test]
    fn perturbations_are_small_at_leo() {
        // Equatorial crossing; near the poles the J2 term alone approaches 3 J2 (R/r)^2.
        let e = Epoch::from_calendar(2026, 3, 20, 0, 0, 0.0).unwrap();
        let s = StateVector::from_keplerian(e, R_EARTH_EQ + 550e3, 0.0, 97.6f64.to_radians(), 0.3, 0.0, 0.0);
        let sc = SpacecraftParams::default();
        let base = acceleration(s.epoch, &s, &sc, &ForceModelConfig::two_body()).unwrap();
        let full = acceleration(s.epoch, &s, &sc, &ForceModelConfig::default()).unwrap();
        let rel = (full - base).norm() / base.norm();
        assert!(rel < 2e-3 && rel > 1e-4, "{rel}");
    }

    #[test]
    fn drag_opposes_relative_velocity() {
        let s = leo_state();
        let a = drag_acceleration(s.epoch, &s, &SpacecraftParams::default()).unwrap();
        let v_rel = s.velocity - Vector3::new(0.0, 0.0, OMEGA_EARTH).cross(&s.position);
        let angle = (-a).angle(&v_rel);
        assert!(angle < 1e-9, "{angle}");
    }

    #[test]
    fn deterministic() {
        let s = leo_state();
        let sc = SpacecraftParams::default();
        let cfg = ForceModelConfig::default();
        let a = acceleration(s.epoch, &s, &sc, &cfg).unwrap();
        let b = acceleration(s.epoch, &s, &sc, &cfg).unwrap();
        assert_eq!(a.map(f64::to_bits), b.map(f64::to_bits));
    }

    #[test]
    fn below_floor_is_reentry() {
        let e = Epoch::J2000;
        let s = StateVector::new(e, Vector3::new(R_EARTH_EQ + 90e3, 0.0, 0.0), Vector3::new(0.0, 7800.0, 0.0));
        let err = acceleration(e, &s, &SpacecraftParams::default(), &ForceModelConfig::two_body()).unwrap_err();
        assert!(matches!(err, Error::Reentry { .. }));
    }

    #[test]
    fn config_validation() {
        assert!(ForceModelConfig::default().validate().is_ok());
        let bad = ForceModelConfig { gravity_degree: 4, gravity_order: 5, ..Default::default() };
        assert!(bad.validate().is_err());
        let too_deep = ForceModelConfig { gravity_degree: 40, gravity_order: 0, ..Default::default() };
        assert!(too_deep.validate().is_err());
        let sc = SpacecraftParams { drag_coefficient: 4.0, ..Default::default() };
        assert!(sc.validate().is_err());
        assert!(SpacecraftParams::default().validate().is_ok());
    }
}
