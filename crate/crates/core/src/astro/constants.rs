//! Physical constants (SI units).

/// Earth gravitational parameter (m^3/s^2).
pub const MU_EARTH: f64 = 3.986004415e14;
/// WGS-84 equatorial radius (m).
pub const R_EARTH_EQ: f64 = 6_378_137.0;
/// WGS-84 flattening.
pub const WGS84_F: f64 = 1.0 / 298.257223563;
/// WGS-84 polar radius (m).
pub const R_EARTH_POLAR: f64 = R_EARTH_EQ * (1.0 - WGS84_F);
/// Earth rotation rate (rad/s).
pub const OMEGA_EARTH: f64 = 7.292115146706979e-5;
/// Earth rotation angle at J2000 (rad); GMST at 2000-01-01T12:00:00.
pub const EARTH_ROTATION_ANGLE_J2000: f64 = 4.894_961_212_823_756;

pub const MU_SUN: f64 = 1.327_124_400_18e20;
pub const MU_MOON: f64 = 4.902_800_066e12;
/// Astronomical unit (m).
pub const AU: f64 = 1.495_978_707e11;
/// Photospheric solar radius (m), used by the eclipse model.
pub const R_SUN: f64 = 6.957e8;
/// Solar radiation pressure at 1 AU (N/m^2).
pub const P_SUN: f64 = 4.56e-6;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub const SECONDS_PER_DAY: f64 = 86_400.0;
/// Julian date of the J2000 reference epoch.
pub const JD_J2000: f64 = 2_451_545.0;
