//! Rotationally symmetric model manifolds `dr^2 + f(r)^2 g_S`, possibly cut
//! to a sector whose wall is the manifold boundary.

use super::GeometryError;
use crate::quad::{self, Tolerance};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::str::FromStr;

/// Radius up to which closed-form warps are checked for positivity.
pub const R_PROBE: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WarpKind {
    Euclidean,
    Hyperbolic,
    Cusp,
    Power,
    Sampled,
}

impl FromStr for WarpKind {
    type Err = GeometryError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "flat" => Ok(WarpKind::Euclidean),
            "hyperbolic" => Ok(WarpKind::Hyperbolic),
            "cusp" => Ok(WarpKind::Cusp),
            "power" => Ok(WarpKind::Power),
            "sampled" | "table" => Ok(WarpKind::Sampled),
            other => Err(GeometryError::InvalidWarp(format!("unknown warp '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Warp {
    Euclidean,
    Hyperbolic,
    Cusp,
    Power(f64),
    /// Piecewise-linear table; extrapolated linearly past the last sample.
    Sampled { r: Vec<f64>, f: Vec<f64> },
}

impl Warp {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Warp::Euclidean => t,
            Warp::Hyperbolic => t.sinh(),
            Warp::Cusp => (-t).exp(),
            Warp::Power(a) => t.powf(*a),
            Warp::Sampled { r, f } => {
                let n = r.len();
                let k = match r.iter().position(|&x| x > t) {
                    Some(0) => 0,
                    Some(k) => k - 1,
                    None => n - 2,
                };
                let s = (t - r[k]) / (r[k + 1] - r[k]);
                f[k] + s * (f[k + 1] - f[k])
            }
        }
    }

    pub fn kind(&self) -> WarpKind {
        match self {
            Warp::Euclidean => WarpKind::Euclidean,
            Warp::Hyperbolic => WarpKind::Hyperbolic,
            Warp::Cusp => WarpKind::Cusp,
            Warp::Power(_) => WarpKind::Power,
            Warp::Sampled { .. } => WarpKind::Sampled,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelManifold {
    pub dim: usize,
    pub warp: Warp,
    pub sector_fraction: f64,
}

/// Area of the unit `(m-1)`-sphere, `2 pi^(m/2) / Gamma(m/2)`.
pub fn unit_sphere_area(m: usize) -> f64 {
    assert!(m >= 1);
    2.0 * PI.powf(m as f64 / 2.0) / gamma_half(m)
}

// Gamma(m/2) for a positive integer m.
fn gamma_half(m: usize) -> f64 {
    if m % 2 == 0 {
        (1..m / 2).map(|k| k as f64).product()
    } else {
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x < m as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

pub fn build_model(kind: WarpKind, params: &[f64], dim: usize, sector_fraction: f64) -> Result<ModelManifold, GeometryError> {
    if dim < 2 {
        return Err(GeometryError::InvalidWarp(format!("dimension {dim} < 2")));
    }
    if !(sector_fraction > 0.0 && sector_fraction <= 1.0) {
        return Err(GeometryError::InvalidFraction(sector_fraction));
    }
    let warp = match kind {
        WarpKind::Euclidean => Warp::Euclidean,
        WarpKind::Hyperbolic => Warp::Hyperbolic,
        WarpKind::Cusp => Warp::Cusp,
        WarpKind::Power => {
            let a = *params
                .first()
                .ok_or_else(|| GeometryError::InvalidWarp("power warp needs an exponent".into()))?;
            if !(a.is_finite() && a > 0.0) {
                return Err(GeometryError::InvalidWarp(format!("power exponent {a} must be positive")));
            }
            Warp::Power(a)
        }
        WarpKind::Sampled => {
            if params.len() < 4 || params.len() % 2 != 0 {
                return Err(GeometryError::InvalidWarp("sampled warp needs pairs r0,f0,r1,f1,...".into()));
            }
            let r: Vec<f64> = params.iter().step_by(2).copied().collect();
            let f: Vec<f64> = params.iter().skip(1).step_by(2).copied().collect();
            if r[0] < 0.0 || r.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(GeometryError::InvalidWarp("sample radii must be non-negative and strictly increasing".into()));
            }
            Warp::Sampled { r, f }
        }
    };
    if !matches!(kind, WarpKind::Power | WarpKind::Sampled) && !params.is_empty() {
        return Err(GeometryError::InvalidWarp(format!("{kind:?} warp takes no parameters")));
    }
    let probe_end = match &warp {
        Warp::Sampled { r, .. } => *r.last().unwrap(),
        _ => R_PROBE,
    };
    for i in 1..=256 {
        let t = probe_end * i as f64 / 256.0;
        let v = warp.eval(t);
        if !(v > 0.0 && v.is_finite()) {
            return Err(GeometryError::InvalidWarp(format!("warp is not positive at r = {t}")));
        }
    }
    if let Warp::Sampled { r, f } = &warp {
        if r.iter().zip(f).any(|(&ri, &fi)| fi < 0.0 || (ri > 0.0 && fi <= 0.0)) {
            return Err(GeometryError::InvalidWarp("sampled warp must be positive for r > 0".into()));
        }
    }
    Ok(ModelManifold {
        dim,
        warp,
        sector_fraction,
    })
}

impl ModelManifold {
    /// `sector * omega_(m-1)`, the factor in front of every radial integral.
    pub fn angular_measure(&self) -> f64 {
        self.sector_fraction * unit_sphere_area(self.dim)
    }

    /// Integrand of the ball volume, `f(t)^(m-1)`.
    pub fn density(&self, t: f64) -> f64 {
        self.warp.eval(t).powi(self.dim as i32 - 1)
    }

    /// Volume of the geodesic ball about the pole; closed form where one is
    /// known, adaptive quadrature otherwise.
    pub fn ball_volume(&self, r: f64) -> Result<f64, GeometryError> {
        if r < 0.0 {
            return Err(GeometryError::RadiusOutOfRange(r));
        }
        let k = (self.dim - 1) as f64;
        let integral = match (&self.warp, self.dim) {
            (Warp::Euclidean, _) => r.powf(k + 1.0) / (k + 1.0),
            (Warp::Hyperbolic, 2) => r.cosh() - 1.0,
            (Warp::Cusp, _) => (1.0 - (-k * r).exp()) / k,
            (Warp::Power(a), _) => r.powf(a * k + 1.0) / (a * k + 1.0),
            _ => return self.ball_volume_quadrature(r),
        };
        Ok(self.angular_measure() * integral)
    }

    /// Ball volume by adaptive quadrature only (independent of the closed
    /// forms used in [`ModelManifold::ball_volume`]).
    pub fn ball_volume_quadrature(&self, r: f64) -> Result<f64, GeometryError> {
        if r < 0.0 {
            return Err(GeometryError::RadiusOutOfRange(r));
        }
        let tol = Tolerance::default();
        let mut total = 0.0;
        // Integrate piecewise so table kinks fall on interval ends.
        let mut breaks = vec![0.0];
        if let Warp::Sampled { r: rs, .. } = &self.warp {
            breaks.extend(rs.iter().copied().filter(|&x| x > 0.0 && x < r));
        }
        breaks.push(r);
        for w in breaks.windows(2) {
            total += quad::simpson(|t| self.density(t), w[0], w[1], tol)
                .map_err(|e| GeometryError::QuadratureFailure(e.to_string()))?;
        }
        Ok(self.angular_measure() * total)
    }

    pub fn sphere_area(&self, r: f64) -> Result<f64, GeometryError> {
        if !(r > 0.0) {
            return Err(GeometryError::RadiusOutOfRange(r));
        }
        Ok(self.angular_measure() * self.density(r))
    }

    /// Warp of the two-dimensional rotationally symmetric surface with the same
    /// sector and the same sphere areas: `omega_(m-1) f^(m-1) / (2 pi)`.
    ///
    /// Radial condenser problems on the model and on this surface coincide,
    /// which lets meshed families stand in for higher-dimensional models.
    pub fn surface_warp(&self, t: f64) -> f64 {
        unit_sphere_area(self.dim) * self.density(t) / (2.0 * PI)
    }

    /// True when `f(0) = 0`, so the pole is a smooth (cone-free) point.
    pub fn has_pole(&self) -> bool {
        self.warp.eval(0.0) == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_constants() {
        assert_relative_eq!(unit_sphere_area(2), 2.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(unit_sphere_area(3), 4.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(unit_sphere_area(4), 2.0 * PI * PI, max_relative = 1e-15);
        assert_relative_eq!(unit_sphere_area(5), 8.0 * PI * PI / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn half_plane_unit_ball() {
        let m = build_model(WarpKind::Euclidean, &[], 2, 0.5).unwrap();
        assert_relative_eq!(m.ball_volume(1.0).unwrap(), PI / 2.0, max_relative = 1e-14);
        assert_relative_eq!(m.ball_volume(2.0).unwrap(), 2.0 * PI, max_relative = 1e-14);
    }

    #[test]
    fn euclidean_spheres() {
        let r2 = build_model(WarpKind::Euclidean, &[], 2, 1.0).unwrap();
        assert_relative_eq!(r2.ball_volume(2.0).unwrap(), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(r2.sphere_area(3.0).unwrap(), 6.0 * PI, max_relative = 1e-14);
        let r3 = build_model(WarpKind::Euclidean, &[], 3, 1.0).unwrap();
        assert_relative_eq!(r3.sphere_area(1.0).unwrap(), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(r3.sphere_area(2.0).unwrap(), 16.0 * PI, max_relative = 1e-14);
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(build_model(WarpKind::Euclidean, &[], 2, 0.0), Err(GeometryError::InvalidFraction(_))));
        assert!(matches!(build_model(WarpKind::Euclidean, &[], 2, 1.5), Err(GeometryError::InvalidFraction(_))));
        assert!(matches!(build_model(WarpKind::Power, &[-1.0], 2, 1.0), Err(GeometryError::InvalidWarp(_))));
        assert!(matches!(build_model(WarpKind::Sampled, &[0.0, 0.0, 1.0, -1.0], 2, 1.0), Err(GeometryError::InvalidWarp(_))));
        assert!(matches!(build_model(WarpKind::Sampled, &[1.0, 1.0, 0.5, 2.0], 2, 1.0), Err(GeometryError::InvalidWarp(_))));
        assert!(matches!(build_model(WarpKind::Euclidean, &[], 1, 1.0), Err(GeometryError::InvalidWarp(_))));
    }

    #[test]
    fn sampled_table_matches_linear_warp() {
        let m = build_model(WarpKind::Sampled, &[0.0, 0.0, 1.0, 1.0, 3.0, 3.0], 2, 1.0).unwrap();
        assert_relative_eq!(m.ball_volume(2.0).unwrap(), 4.0 * PI, max_relative = 1e-9);
        assert_relative_eq!(m.warp.eval(4.0), 4.0, max_relative = 1e-15);
    }

    #[test]
    fn surface_warp_of_r3() {
        let m = build_model(WarpKind::Euclidean, &[], 3, 1.0).unwrap();
        assert_relative_eq!(m.surface_warp(2.0), 8.0, max_relative = 1e-14);
    }
}
