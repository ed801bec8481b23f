//! Harris-Priester upper-atmosphere density, mean solar activity.

use nalgebra::{Rotation3, Vector3};

use crate::astro::ecef_to_geodetic;
use crate::error::{Error, Result};

/// Bulge exponent `n` in `cos^n(ψ/2)`.
pub const BULGE_EXPONENT: f64 = 3.0;
/// Right-ascension lag of the diurnal bulge apex behind the Sun (rad).
pub const APEX_LAG: f64 = 30.0 * std::f64::consts::PI / 180.0;

pub const MIN_ALTITUDE_M: f64 = 100.0e3;
pub const MAX_ALTITUDE_M: f64 = 1000.0e3;

/// `(altitude km, antapex density, apex density)`, densities in g/km^3
/// (1 g/km^3 = 1e-12 kg/m^3).
const TABLE: [(f64, f64, f64); 50] = [
    (100.0, 497_400.0, 497_400.0),
    (120.0, 24_900.0, 24_900.0),
    (130.0, 8377.0, 8710.0),
    (140.0, 3899.0, 4059.0),
    (150.0, 2122.0, 2215.0),
    (160.0, 1263.0, 1344.0),
    (170.0, 800.8, 875.8),
    (180.0, 528.3, 601.0),
    (190.0, 361.7, 429.7),
    (200.0, 255.7, 316.2),
    (210.0, 183.9, 239.6),
    (220.0, 134.1, 185.3),
    (230.0, 99.49, 145.5),
    (240.0, 74.88, 115.7),
    (250.0, 57.09, 93.08),
    (260.0, 44.03, 75.55),
    (270.0, 34.30, 61.82),
    (280.0, 26.97, 50.95),
    (290.0, 21.39, 42.26),
    (300.0, 17.08, 35.26),
    (320.0, 10.99, 25.11),
    (340.0, 7.214, 18.19),
    (360.0, 4.824, 13.37),
    (380.0, 3.274, 9.955),
    (400.0, 2.249, 7.492),
    (420.0, 1.558, 5.684),
    (440.0, 1.091, 4.355),
    (460.0, 0.7701, 3.362),
    (480.0, 0.5474, 2.612),
    (500.0, 0.3916, 2.042),
    (520.0, 0.2819, 1.605),
    (540.0, 0.2042, 1.267),
    (560.0, 0.1488, 1.005),
    (580.0, 0.1092, 0.7997),
    (600.0, 0.08070, 0.6390),
    (620.0, 0.06012, 0.5123),
    (640.0, 0.04519, 0.4121),
    (660.0, 0.03430, 0.3325),
    (680.0, 0.02632, 0.2691),
    (700.0, 0.02043, 0.2185),
    (720.0, 0.01607, 0.1779),
    (740.0, 0.01281, 0.1452),
    (760.0, 0.01036, 0.1190),
    (780.0, 0.008496, 0.09776),
    (800.0, 0.007069, 0.08059),
    (840.0, 0.004680, 0.05741),
    (880.0, 0.003200, 0.04210),
    (920.0, 0.002210, 0.03130),
    (960.0, 0.001560, 0.02360),
    (1000.0, 0.001150, 0.01810),
];

const G_PER_KM3: f64 = 1e-12;

/// Antapex and apex densities (kg/m^3) at a geodetic altitude, with
/// exponential interpolation between table nodes.
pub fn density_bounds(altitude_m: f64) -> Result<(f64, f64)> {
    if !(MIN_ALTITUDE_M..=MAX_ALTITUDE_M).contains(&altitude_m) {
        return Err(Error::AtmosphereDomain {
            altitude_m,
            min_m: MIN_ALTITUDE_M,
            max_m: MAX_ALTITUDE_M,
        });
    }
    let h = altitude_m / 1e3;
    let i = TABLE
        .windows(2)
        .position(|w| h <= w[1].0)
        .unwrap_or(TABLE.len() - 2);
    let (h0, min0, max0) = TABLE[i];
    let (h1, min1, max1) = TABLE[i + 1];
    let t = (h - h0) / (h1 - h0);
    let interp = |a: f64, b: f64| (a.ln() + t * (b.ln() - a.ln())).exp() * G_PER_KM3;
    Ok((interp(min0, min1), interp(max0, max1)))
}

/// `cos^n(ψ/2)` where ψ is the angle between the position and the bulge apex.
pub fn bulge_factor(r: &Vector3<f64>, sun_direction: &Vector3<f64>) -> f64 {
    let apex = Rotation3::from_axis_angle(&Vector3::z_axis(), APEX_LAG) * sun_direction.normalize();
    let cos_psi = (r.dot(&apex) / r.norm()).clamp(-1.0, 1.0);
    (0.5 * (1.0 + cos_psi)).powf(0.5 * BULGE_EXPONENT)
}

/// Harris-Priester density (kg/m^3). `r_ecef` and `sun_direction` must be
/// expressed in the same Earth-centered frame.
pub fn harris_priester_density(r_ecef: &Vector3<f64>, sun_direction: &Vector3<f64>) -> Result<f64> {
    let altitude = ecef_to_geodetic(r_ecef)?.altitude;
    let (rho_min, rho_max) = density_bounds(altitude)?;
    Ok(rho_min + (rho_max - rho_min) * bulge_factor(r_ecef, sun_direction))
}
