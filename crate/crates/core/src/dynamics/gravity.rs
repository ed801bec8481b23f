//! Spherical-harmonic geopotential.
//!
//! Accelerations use the recursive V/W formulation (Cunningham), evaluated
//! in the Earth-fixed frame with unnormalized coefficients derived from the
//! fully normalized set at load time.

use std::sync::OnceLock;

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Gravitational parameter that accompanies the bundled coefficient set.
pub const EGM2008_GM: f64 = 3.986004415e14;
/// Reference radius of the bundled coefficient set (m).
pub const EGM2008_RADIUS: f64 = 6_378_136.3;
/// Highest degree/order shipped with the crate.
pub const BUNDLED_MAX_DEGREE: usize = 20;

const EGM2008_TEXT: &str = include_str!("../../data/egm2008_deg20.txt");

#[derive(Debug, Clone)]
pub struct GravityField {
    gm: f64,
    radius: f64,
    max_degree: usize,
    /// Fully normalized coefficients, packed by `n * (n + 1) / 2 + m`.
    c_norm: Vec<f64>,
    s_norm: Vec<f64>,
    c: Vec<f64>,
    s: Vec<f64>,
}

fn idx(n: usize, m: usize) -> usize {
    n * (n + 1) / 2 + m
}

/// Ratio (n-m)!/(n+m)! computed as a running product.
fn factorial_ratio(n: usize, m: usize) -> f64 {
    ((n - m + 1)..=(n + m)).fold(1.0, |acc, k| acc / k as f64)
}

fn normalization(n: usize, m: usize) -> f64 {
    let delta = if m == 0 { 1.0 } else { 2.0 };
    (delta * (2 * n + 1) as f64 * factorial_ratio(n, m)).sqrt()
}

impl GravityField {
    /// Builds a field from normalized `(degree, order, C, S)` rows. Missing
    /// rows are zero; `C00` defaults to one.
    pub fn from_coefficients(
        gm: f64,
        radius: f64,
        max_degree: usize,
        rows: &[(usize, usize, f64, f64)],
    ) -> Result<Self> {
        let len = idx(max_degree, max_degree) + 1;
        let mut c_norm = vec![0.0; len];
        let mut s_norm = vec![0.0; len];
        c_norm[0] = 1.0;
        for &(n, m, c, s) in rows {
            if m > n {
                return Err(Error::InvalidInput(format!("order {m} exceeds degree {n}")));
            }
            if n > max_degree {
                continue;
            }
            c_norm[idx(n, m)] = c;
            s_norm[idx(n, m)] = s;
        }
        let mut c = vec![0.0; len];
        let mut s = vec![0.0; len];
        for n in 0..=max_degree {
            for m in 0..=n {
                let k = normalization(n, m);
                c[idx(n, m)] = k * c_norm[idx(n, m)];
                s[idx(n, m)] = k * s_norm[idx(n, m)];
            }
        }
        Ok(Self {
            gm,
            radius,
            max_degree,
            c_norm,
            s_norm,
            c,
            s,
        })
    }

    /// Parses whitespace-separated `degree order C S` rows; `#` starts a comment.
    pub fn parse(text: &str, gm: f64, radius: f64, max_degree: usize) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < 4 {
                return Err(Error::GravityFile {
                    line: lineno + 1,
                    reason: format!("expected 4 fields, found {}", fields.len()),
                });
            }
            let bad = |reason: String| Error::GravityFile {
                line: lineno + 1,
                reason,
            };
            let n: usize = fields[0].parse().map_err(|e| bad(format!("degree: {e}")))?;
            let m: usize = fields[1].parse().map_err(|e| bad(format!("order: {e}")))?;
            let c: f64 = fields[2].parse().map_err(|e| bad(format!("C: {e}")))?;
            let s: f64 = fields[3].parse().map_err(|e| bad(format!("S: {e}")))?;
            rows.push((n, m, c, s));
        }
        Self::from_coefficients(gm, radius, max_degree, &rows)
    }

    /// The bundled EGM2008 subset (degree/order 20).
    pub fn egm2008() -> &'static GravityField {
        static FIELD: OnceLock<GravityField> = OnceLock::new();
        FIELD.get_or_init(|| {
            GravityField::parse(EGM2008_TEXT, EGM2008_GM, EGM2008_RADIUS, BUNDLED_MAX_DEGREE)
                .expect("bundled gravity coefficients are well formed")
        })
    }

    pub fn gm(&self) -> f64 {
        self.gm
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Fully normalized `(C, S)` for a degree/order pair.
    pub fn normalized(&self, n: usize, m: usize) -> (f64, f64) {
        (self.c_norm[idx(n, m)], self.s_norm[idx(n, m)])
    }

    fn check(&self, degree: usize, order: usize) -> Result<()> {
        if degree > self.max_degree || order > degree {
            return Err(Error::GravityDegree {
                degree,
                order,
                max: self.max_degree,
            });
        }
        Ok(())
    }

    /// V/W harmonic terms up to degree `nmax`.
    fn harmonics(&self, r: &Vector3<f64>, nmax: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let r2 = r.norm_squared();
        let rr = self.radius / r2;
        let (x0, y0, z0) = (r.x * rr, r.y * rr, r.z * rr);
        let rho = self.radius * rr;

        let mut v = vec![vec![0.0; nmax + 1]; nmax + 1];
        let mut w = vec![vec![0.0; nmax + 1]; nmax + 1];
        v[0][0] = self.radius / r2.sqrt();
        w[0][0] = 0.0;

        for m in 0..=nmax {
            if m > 0 {
                let k = (2 * m - 1) as f64;
                v[m][m] = k * (x0 * v[m - 1][m - 1] - y0 * w[m - 1][m - 1]);
                w[m][m] = k * (x0 * w[m - 1][m - 1] + y0 * v[m - 1][m - 1]);
            }
            if m < nmax {
                let k = (2 * m + 1) as f64;
                v[m + 1][m] = k * z0 * v[m][m];
                w[m + 1][m] = k * z0 * w[m][m];
            }
            for n in (m + 2)..=nmax {
                let a = (2 * n - 1) as f64 / (n - m) as f64;
                let b = (n + m - 1) as f64 / (n - m) as f64;
                v[n][m] = a * z0 * v[n - 1][m] - b * rho * v[n - 2][m];
                w[n][m] = a * z0 * w[n - 1][m] - b * rho * w[n - 2][m];
            }
        }
        (v, w)
    }

    /// Gravitational acceleration in the Earth-fixed frame (m/s^2).
    pub fn acceleration(&self, r_ecef: &Vector3<f64>, degree: usize, order: usize) -> Result<Vector3<f64>> {
        self.check(degree, order)?;
        let (v, w) = self.harmonics(r_ecef, degree + 1);
        let (mut ax, mut ay, mut az) = (0.0, 0.0, 0.0);

        for n in 0..=degree {
            for m in 0..=order.min(n) {
                let c = self.c[idx(n, m)];
                let s = self.s[idx(n, m)];
                if c == 0.0 && s == 0.0 {
                    continue;
                }
                if m == 0 {
                    ax -= c * v[n + 1][1];
                    ay -= c * w[n + 1][1];
                } else {
                    let f = ((n - m + 1) * (n - m + 2)) as f64;
                    ax += 0.5 * (-c * v[n + 1][m + 1] - s * w[n + 1][m + 1])
                        + 0.5 * f * (c * v[n + 1][m - 1] + s * w[n + 1][m - 1]);
                    ay += 0.5 * (-c * w[n + 1][m + 1] + s * v[n + 1][m + 1])
                        + 0.5 * f * (-c * w[n + 1][m - 1] + s * v[n + 1][m - 1]);
                }
                az += (n - m + 1) as f64 * (-c * v[n + 1][m] - s * w[n + 1][m]);
            }
        }

        let k = self.gm / (self.radius * self.radius);
        Ok(Vector3::new(ax, ay, az) * k)
    }

    /// Gravitational potential energy per unit mass (J/kg, negative outside
    /// the body). The acceleration is the negative gradient of this value.
    pub fn potential(&self, r_ecef: &Vector3<f64>, degree: usize, order: usize) -> Result<f64> {
        self.check(degree, order)?;
        let (v, w) = self.harmonics(r_ecef, degree);
        let mut sum = 0.0;
        for n in 0..=degree {
            for m in 0..=order.min(n) {
                sum += self.c[idx(n, m)] * v[n][m] + self.s[idx(n, m)] * w[n][m];
            }
        }
        Ok(-self.gm / self.radius * sum)
    }
}

/// Earth-fixed acceleration from the bundled field truncated to `degree`x`order`.
pub fn gravity_spherical_harmonic(r_ecef: &Vector3<f64>, degree: usize, order: usize) -> Result<Vector3<f64>> {
    GravityField::egm2008().acceleration(r_ecef, degree, order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point_mass(field: &GravityField, r: &Vector3<f64>) -> Vector3<f64> {
        -field.gm() * r / r.norm().powi(3)
    }

    #[test]
    fn bundled_field_loads() {
        let f = GravityField::egm2008();
        assert_eq!(f.max_degree(), 20);
        let (c20, _) = f.normalized(2, 0);
        assert_eq!(c20, -4.841651437908150e-4);
        let (c2020, s2020) = f.normalized(20, 20);
        assert!(c2020 != 0.0 && s2020 != 0.0);
    }

    #[test]
    fn degree_zero_is_point_mass() {
        let f = GravityField::egm2008();
        for r in [
            Vector3::new(6_928_137.0, 0.0, 0.0),
            Vector3::new(-3.1e6, 4.4e6, 4.2e6),
            Vector3::new(1.0e5, -2.0e5, -7.0e6),
        ] {
            let a = f.acceleration(&r, 0, 0).unwrap();
            let pm = point_mass(f, &r);
            assert!((a - pm).norm() / pm.norm() < 1e-12);
        }
    }

    #[test]
    fn j2_radial_term_at_equator() {
        let c20 = -4.841651437908150e-4;
        let j2 = -c20 * 5f64.sqrt();
        let field = GravityField::from_coefficients(EGM2008_GM, EGM2008_RADIUS, 2, &[(2, 0, c20, 0.0)]).unwrap();
        let r = Vector3::new(6_928_137.0, 0.0, 0.0);
        let a = field.acceleration(&r, 2, 0).unwrap() - point_mass(&field, &r);
        let expected = 1.5 * j2 * EGM2008_GM * EGM2008_RADIUS.powi(2) / r.norm().powi(4);
        // Extra attraction, pointing inward.
        assert!(a.x < 0.0);
        assert!(((a.x.abs() - expected) / expected).abs() < 1e-6);
        assert!(a.y.abs() < 1e-15 && a.z.abs() < 1e-15);
    }

    #[test]
    fn rejects_out_of_range_degree() {
        let r = Vector3::new(7.0e6, 0.0, 0.0);
        assert!(matches!(
            gravity_spherical_harmonic(&r, 21, 0),
            Err(Error::GravityDegree { .. })
        ));
        assert!(gravity_spherical_harmonic(&r, 4, 5).is_err());
    }

    #[test]
    fn parse_reports_bad_lines() {
        let err = GravityField::parse("2 0 -4.8e-4\n", EGM2008_GM, EGM2008_RADIUS, 2).unwrap_err();
        assert!(matches!(err, Error::GravityFile { line: 1, .. }));
        let err = GravityField::parse("# header\n2 x 1 0\n", EGM2008_GM, EGM2008_RADIUS, 2).unwrap_err();
        assert!(matches!(err, Error::GravityFile { line: 2, .. }));
    }
}
