//! Time, reference frames, geodesy and low-precision ephemerides.

pub mod constants;
mod ephemeris;
mod epoch;
mod frames;
mod geodetic;

pub use ephemeris::{analytic_moon_position, analytic_sun_position};
pub use epoch::Epoch;
pub use frames::{earth_rotation_angle, ecef_to_eci, eci_to_ecef};
pub use geodetic::{ecef_to_geodetic, geodetic_to_ecef, GeodeticPoint};

use nalgebra::Vector3;

/// Earth-centered inertial position and velocity at an epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub epoch: Epoch,
    /// Position in meters.
    pub position: Vector3<f64>,
    /// Velocity in meters per second.
    pub velocity: Vector3<f64>,
}

impl StateVector {
    pub fn new(epoch: Epoch, position: Vector3<f64>, velocity: Vector3<f64>) -> Self {
        Self {
            epoch,
            position,
            velocity,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().chain(self.velocity.iter()).all(|c| c.is_finite())
    }

    /// Specific orbital energy under a point-mass field (J/kg).
    pub fn specific_energy(&self) -> f64 {
        0.5 * self.velocity.norm_squared() - constants::MU_EARTH / self.position.norm()
    }

    pub fn angular_momentum(&self) -> Vector3<f64> {
        self.position.cross(&self.velocity)
    }

    /// Builds a state from classical orbital elements (angles in radians).
    pub fn from_keplerian(
        epoch: Epoch,
        semi_major_axis: f64,
        eccentricity: f64,
        inclination: f64,
        raan: f64,
        arg_perigee: f64,
        true_anomaly: f64,
    ) -> Self {
        let mu = constants::MU_EARTH;
        let p = semi_major_axis * (1.0 - eccentricity * eccentricity);
        let r = p / (1.0 + eccentricity * true_anomaly.cos());
        let r_pqw = Vector3::new(r * true_anomaly.cos(), r * true_anomaly.sin(), 0.0);
        let k = (mu / p).sqrt();
        let v_pqw = Vector3::new(
            -k * true_anomaly.sin(),
            k * (eccentricity + true_anomaly.cos()),
            0.0,
        );

        let rot = nalgebra::Rotation3::from_axis_angle(&Vector3::z_axis(), raan)
            * nalgebra::Rotation3::from_axis_angle(&Vector3::x_axis(), inclination)
            * nalgebra::Rotation3::from_axis_angle(&Vector3::z_axis(), arg_perigee);

        Self::new(epoch, rot * r_pqw, rot * v_pqw)
    }
}
