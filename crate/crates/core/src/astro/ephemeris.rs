//! Low-precision analytic Sun and Moon positions (mean equator and equinox
//! of J2000). Accuracy is roughly 0.1% in distance and 0.01° (Sun) /
//! a few arcminutes (Moon) in direction, ample for perturbation forces.

use nalgebra::{Rotation3, Vector3};

use super::Epoch;

/// Obliquity of the ecliptic at J2000 (rad).
const OBLIQUITY_J2000: f64 = 23.439_291_11 * std::f64::consts::PI / 180.0;
const ARCSEC: f64 = std::f64::consts::PI / (180.0 * 3600.0);

fn ecliptic_to_equatorial(v: Vector3<f64>) -> Vector3<f64> {
    Rotation3::from_axis_angle(&Vector3::x_axis(), OBLIQUITY_J2000) * v
}

/// Geocentric inertial Sun position (m).
pub fn analytic_sun_position(epoch: Epoch) -> Vector3<f64> {
    let t = epoch.julian_centuries();
    let m = (357.5256 + 35_999.049 * t).to_radians();
    let lon = (282.9400_f64).to_radians() + m + 6892.0 * ARCSEC * m.sin() + 72.0 * ARCSEC * (2.0 * m).sin();
    let r = (149.619 - 2.499 * m.cos() - 0.021 * (2.0 * m).cos()) * 1e9;
    ecliptic_to_equatorial(Vector3::new(r * lon.cos(), r * lon.sin(), 0.0))
}

/// Geocentric inertial Moon position (m).
pub fn analytic_moon_position(epoch: Epoch) -> Vector3<f64> {
    let t = epoch.julian_centuries();
    let deg = |x: f64| x.to_radians();
    // Mean longitude (with precession removed), anomalies, argument of latitude, elongation.
    let l0 = deg(218.316_17 + 481_267.880_88 * t - 1.3972 * t);
    let l = deg(134.962_92 + 477_198.867_53 * t);
    let lp = deg(357.525_43 + 35_999.049_44 * t);
    let f = deg(93.272_83 + 483_202.018_73 * t);
    let d = deg(297.850_27 + 445_267.111_35 * t);

    let lon = l0
        + ARCSEC
            * (22_640.0 * l.sin() + 769.0 * (2.0 * l).sin() - 4586.0 * (l - 2.0 * d).sin()
                + 2370.0 * (2.0 * d).sin()
                - 668.0 * lp.sin()
                - 412.0 * (2.0 * f).sin()
                - 212.0 * (2.0 * l - 2.0 * d).sin()
                - 206.0 * (l + lp - 2.0 * d).sin()
                + 192.0 * (l + 2.0 * d).sin()
                - 165.0 * (lp - 2.0 * d).sin()
                + 148.0 * (l - lp).sin()
                - 125.0 * d.sin()
                - 110.0 * (l + lp).sin()
                - 55.0 * (2.0 * f - 2.0 * d).sin());

    let lat = ARCSEC
        * (18_520.0 * (f + lon - l0 + ARCSEC * (412.0 * (2.0 * f).sin() + 541.0 * lp.sin())).sin()
            - 526.0 * (f - 2.0 * d).sin()
            + 44.0 * (l + f - 2.0 * d).sin()
            - 31.0 * (-l + f - 2.0 * d).sin()
            - 25.0 * (-2.0 * l + f).sin()
            - 23.0 * (lp + f - 2.0 * d).sin()
            + 21.0 * (-l + f).sin()
            + 11.0 * (-lp + f - 2.0 * d).sin());

    let r = (385_000.0
        - 20_905.0 * l.cos()
        - 3699.0 * (2.0 * d - l).cos()
        - 2956.0 * (2.0 * d).cos()
        - 570.0 * (2.0 * l).cos()
        + 246.0 * (2.0 * l - 2.0 * d).cos()
        - 205.0 * (lp - 2.0 * d).cos()
        - 171.0 * (l + 2.0 * d).cos()
        - 152.0 * (l + lp - 2.0 * d).cos())
        * 1e3;

    ecliptic_to_equatorial(Vector3::new(
        r * lon.cos() * lat.cos(),
        r * lon.sin() * lat.cos(),
        r * lat.sin(),
    ))
}
