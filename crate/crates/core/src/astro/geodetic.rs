use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::constants::{R_EARTH_EQ, WGS84_F};
use crate::error::{Error, Result};

/// WGS-84 geodetic coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodeticPoint {
    /// Radians, in `[-π/2, π/2]`.
    pub latitude: f64,
    /// Radians, in `[-π, π)`.
    pub longitude: f64,
    /// Meters above the ellipsoid.
    pub altitude: f64,
}

impl GeodeticPoint {
    pub fn new(latitude: f64, longitude: f64, altitude: f64) -> Result<Self> {
        if !(-FRAC_PI_2..=FRAC_PI_2).contains(&latitude) || !latitude.is_finite() {
            return Err(Error::InvalidInput(format!("latitude {latitude} rad out of range")));
        }
        if !longitude.is_finite() || !altitude.is_finite() {
            return Err(Error::InvalidInput("non-finite geodetic coordinate".into()));
        }
        Ok(Self {
            latitude,
            longitude: wrap_longitude(longitude),
            altitude,
        })
    }

    pub fn from_degrees(lat_deg: f64, lon_deg: f64, altitude: f64) -> Result<Self> {
        Self::new(lat_deg.to_radians(), lon_deg.to_radians(), altitude)
    }

    pub fn to_ecef(&self) -> Vector3<f64> {
        geodetic_to_ecef(self)
    }
}

fn wrap_longitude(lon: f64) -> f64 {
    let wrapped = (lon + PI).rem_euclid(2.0 * PI) - PI;
    if wrapped >= PI {
        -PI
    } else {
        wrapped
    }
}

const E2: f64 = WGS84_F * (2.0 - WGS84_F);

pub fn geodetic_to_ecef(p: &GeodeticPoint) -> Vector3<f64> {
    let (sin_lat, cos_lat) = p.latitude.sin_cos();
    let (sin_lon, cos_lon) = p.longitude.sin_cos();
    let n = R_EARTH_EQ / (1.0 - E2 * sin_lat * sin_lat).sqrt();
    Vector3::new(
        (n + p.altitude) * cos_lat * cos_lon,
        (n + p.altitude) * cos_lat * sin_lon,
        (n * (1.0 - E2) + p.altitude) * sin_lat,
    )
}

/// Fixed-point iteration on latitude; the altitude expression is well
/// conditioned at the poles.
pub fn ecef_to_geodetic(r: &Vector3<f64>) -> Result<GeodeticPoint> {
    if !(r.norm() > 0.0) {
        return Err(Error::InvalidInput(
            "geodetic conversion undefined at the geocenter".into(),
        ));
    }
    let p = r.x.hypot(r.y);
    let longitude = wrap_longitude(r.y.atan2(r.x));

    let mut lat = r.z.atan2(p * (1.0 - E2));
    for _ in 0..30 {
        let sin_lat = lat.sin();
        let n = R_EARTH_EQ / (1.0 - E2 * sin_lat * sin_lat).sqrt();
        let next = (r.z + E2 * n * sin_lat).atan2(p);
        let done = (next - lat).abs() < 1e-15;
        lat = next;
        if done {
            break;
        }
    }
    let (sin_lat, cos_lat) = lat.sin_cos();
    let altitude = p * cos_lat + r.z * sin_lat - R_EARTH_EQ * (1.0 - E2 * sin_lat * sin_lat).sqrt();

    Ok(GeodeticPoint {
        latitude: lat,
        longitude,
        altitude,
    })
}
