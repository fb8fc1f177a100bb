//! Exhaustion families of meshes for rotationally symmetric surfaces.
//!
//! A model with effective surface warp `F` is meshed in the conformal
//! coordinates `(s, theta)`, `ds = dr / F(r)`, where its metric reads
//! `F(r(s))^2 (ds^2 + dtheta^2)`. The grid is split into right triangles
//! whose metric is the conformal factor at the centroid times the flat one,
//! so every stiffness coupling is non-positive and the meshes are nested.

use super::{BoundaryEdge, EdgeLabel, GeometryError, MeshManifold, ModelManifold, Warp};
use crate::quad::{self, Tolerance};
use std::f64::consts::PI;

/// One truncation of an exhaustion.
#[derive(Debug, Clone)]
pub struct FamilyMember {
    pub mesh: MeshManifold,
    /// Vertices of the compact plate (the inner ring).
    pub k: Vec<usize>,
    pub outer_marker: String,
    pub outer_radius: f64,
    /// Observation vertex, present with the same index in every member.
    pub origin: usize,
}

pub trait MeshFamily: Sync {
    fn name(&self) -> String;
    /// Number of available members; they are indexed `1..=len()`.
    fn len(&self) -> usize;
    fn member(&self, j: usize) -> Result<FamilyMember, GeometryError>;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// How the inner circle of a family enters the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerCondition {
    /// Artificial boundary (`D0`, marker `"inner"`): the plate `K`.
    Plate,
    /// True boundary (`D1`, marker `"inner"`).
    Wall,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sector {
    Full,
    Half,
}

impl Sector {
    pub fn fraction(self) -> f64 {
        match self {
            Sector::Full => 1.0,
            Sector::Half => 0.5,
        }
    }
}

/// Conformal radius `s(t)` of a surface warp and its inverse.
#[derive(Debug, Clone)]
pub enum ProfileWarp {
    /// `F = c t^(m-1)`.
    Power { c: f64, m: usize },
    /// `F = sinh t`.
    Hyperbolic,
    /// `F = e^(-t)`.
    Cusp,
    /// Any other model, by quadrature from `a` and bisection.
    Numeric { model: ModelManifold, a: f64 },
}

impl ProfileWarp {
    pub fn for_model(model: &ModelManifold, a: f64) -> Self {
        let c = super::unit_sphere_area(model.dim) / (2.0 * PI);
        match (&model.warp, model.dim) {
            (Warp::Euclidean, m) => ProfileWarp::Power { c, m },
            (Warp::Hyperbolic, 2) => ProfileWarp::Hyperbolic,
            (Warp::Cusp, 2) => ProfileWarp::Cusp,
            _ => ProfileWarp::Numeric { model: model.clone(), a },
        }
    }

    pub fn warp(&self, t: f64) -> f64 {
        match self {
            ProfileWarp::Power { c, m } => c * t.powi(*m as i32 - 1),
            ProfileWarp::Hyperbolic => t.sinh(),
            ProfileWarp::Cusp => (-t).exp(),
            ProfileWarp::Numeric { model, .. } => model.surface_warp(t),
        }
    }

    pub fn s(&self, t: f64) -> Result<f64, GeometryError> {
        Ok(match self {
            ProfileWarp::Power { c, m: 2 } => t.ln() / c,
            ProfileWarp::Power { c, m } => -t.powi(2 - *m as i32) / (c * (*m as f64 - 2.0)),
            ProfileWarp::Hyperbolic => (0.5 * t).tanh().ln(),
            ProfileWarp::Cusp => t.exp(),
            ProfileWarp::Numeric { model, a } => quad::simpson(|x| 1.0 / model.surface_warp(x), *a, t, Tolerance::default())
                .map_err(|e| GeometryError::QuadratureFailure(e.to_string()))?,
        })
    }

    pub fn r(&self, s: f64) -> Result<f64, GeometryError> {
        Ok(match self {
            ProfileWarp::Power { c, m: 2 } => (c * s).exp(),
            ProfileWarp::Power { c, m } => (-s * c * (*m as f64 - 2.0)).powf(1.0 / (2.0 - *m as f64)),
            ProfileWarp::Hyperbolic => 2.0 * s.exp().atanh(),
            ProfileWarp::Cusp => s.ln(),
            ProfileWarp::Numeric { a, .. } => {
                let (mut lo, mut hi) = (*a, 2.0 * a.max(1.0));
                while self.s(hi)? < s {
                    hi *= 2.0;
                    if hi > 1e12 {
                        return Err(GeometryError::MeshingFailure(format!("conformal radius {s} unreachable")));
                    }
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.s(mid)? < s {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-14 * hi {
                        break;
                    }
                }
                0.5 * (lo + hi)
            }
        })
    }
}

/// Nested annular (or half-annular) meshes `a <= r <= R_j` of a model.
#[derive(Debug, Clone)]
pub struct ConformalFamily {
    pub label: String,
    pub model: ModelManifold,
    pub inner_radius: f64,
    pub radii: Vec<f64>,
    pub n_theta: usize,
    pub inner: InnerCondition,
    /// Largest conformal step between rings, as a multiple of the angular
    /// step.
    pub aspect: f64,
    profile: ProfileWarp,
    ring_s: Vec<f64>,
    ring_of_member: Vec<usize>,
}

impl ConformalFamily {
    pub fn new(
        label: &str,
        model: ModelManifold,
        inner_radius: f64,
        radii: Vec<f64>,
        n_theta: usize,
        inner: InnerCondition,
    ) -> Result<Self, GeometryError> {
        Self::with_aspect(label, model, inner_radius, radii, n_theta, inner, 1.0)
    }

    pub fn with_aspect(
        label: &str,
        model: ModelManifold,
        inner_radius: f64,
        radii: Vec<f64>,
        n_theta: usize,
        inner: InnerCondition,
        aspect: f64,
    ) -> Result<Self, GeometryError> {
        if !(inner_radius > 0.0) || radii.is_empty() || !(aspect > 0.0) {
            return Err(GeometryError::MeshingFailure("family needs a > 0, radii and a positive aspect".into()));
        }
        if n_theta < 4 {
            return Err(GeometryError::MeshingFailure("family needs at least 4 angular cells".into()));
        }
        let mut prev = inner_radius;
        for &r in &radii {
            if !(r > prev) || !r.is_finite() {
                return Err(GeometryError::MeshingFailure(format!("radii must increase from {inner_radius}, got {r}")));
            }
            prev = r;
        }
        let profile = ProfileWarp::for_model(&model, inner_radius);
        let dtheta = 2.0 * PI * model.sector_fraction / n_theta as f64;
        let ds_max = aspect * dtheta;
        let mut ring_s = vec![profile.s(inner_radius)?];
        let mut ring_of_member = Vec::with_capacity(radii.len());
        for &r in &radii {
            let (s0, s1) = (*ring_s.last().unwrap(), profile.s(r)?);
            if !(s1 > s0) {
                return Err(GeometryError::MeshingFailure(format!("conformal radius does not increase at r = {r}")));
            }
            let n = ((s1 - s0) / ds_max).ceil().max(1.0) as usize;
            for k in 1..n {
                ring_s.push(s0 + (s1 - s0) * k as f64 / n as f64);
            }
            ring_s.push(s1);
            ring_of_member.push(ring_s.len() - 1);
        }
        if ring_s.len() * (n_theta + 1) > 4_000_000 {
            return Err(GeometryError::MeshingFailure("family too large".into()));
        }
        Ok(ConformalFamily {
            label: label.to_string(),
            model,
            inner_radius,
            radii,
            n_theta,
            inner,
            aspect,
            profile,
            ring_s,
            ring_of_member,
        })
    }

    pub fn periodic(&self) -> bool {
        self.model.sector_fraction >= 1.0
    }

    fn columns(&self) -> usize {
        if self.periodic() {
            self.n_theta
        } else {
            self.n_theta + 1
        }
    }

    pub fn vertex_id(&self, ring: usize, col: usize) -> usize {
        ring * self.columns() + col
    }

    /// Index of the ring closest to conformal radius `s`.
    pub fn ring_near_radius(&self, r: f64) -> Result<usize, GeometryError> {
        let s = self.profile.s(r)?;
        Ok((0..self.ring_s.len())
            .min_by(|&i, &j| (self.ring_s[i] - s).abs().total_cmp(&(self.ring_s[j] - s).abs()))
            .unwrap())
    }

    pub fn ring_radius(&self, ring: usize) -> Result<f64, GeometryError> {
        self.profile.r(self.ring_s[ring])
    }

    pub fn profile(&self) -> &ProfileWarp {
        &self.profile
    }

    /// Ring-major vertex ids of rings `0..=ring` at the middle column.
    pub fn middle_column(&self) -> usize {
        if self.periodic() {
            0
        } else {
            self.n_theta / 2
        }
    }

    fn build(&self, rings: usize, outer_radius: f64) -> Result<FamilyMember, GeometryError> {
        let cols = self.columns();
        let dtheta = 2.0 * PI * self.model.sector_fraction / self.n_theta as f64;
        let mut vertices = Vec::with_capacity((rings + 1) * cols);
        let mut radius = Vec::with_capacity(rings + 1);
        for k in 0..=rings {
            let r = if k == 0 { self.inner_radius } else { self.profile.r(self.ring_s[k])? };
            radius.push(r);
            for i in 0..cols {
                let th = dtheta * i as f64;
                vertices.push([r * th.cos(), r * th.sin(), 0.0]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * rings * self.n_theta);
        let mut grams = Vec::with_capacity(2 * rings * self.n_theta);
        for k in 0..rings {
            let ds = self.ring_s[k + 1] - self.ring_s[k];
            for i in 0..self.n_theta {
                let ip = (i + 1) % cols;
                let v00 = self.vertex_id(k, i);
                let v10 = self.vertex_id(k + 1, i);
                let v11 = self.vertex_id(k + 1, ip);
                let v01 = self.vertex_id(k, ip);
                let lower = (2.0 * self.ring_s[k] + self.ring_s[k + 1]) / 3.0;
                let upper = (self.ring_s[k] + 2.0 * self.ring_s[k + 1]) / 3.0;
                // [v00, v10, v11]: e1 = (ds, 0), e2 = (ds, dtheta)
                let l1 = self.profile.warp(self.profile.r(upper)?).powi(2);
                triangles.push([v00, v10, v11]);
                grams.push([[l1 * ds * ds, l1 * ds * ds], [l1 * ds * ds, l1 * (ds * ds + dtheta * dtheta)]]);
                // [v00, v11, v01]: e1 = (ds, dtheta), e2 = (0, dtheta)
                let l2 = self.profile.warp(self.profile.r(lower)?).powi(2);
                triangles.push([v00, v11, v01]);
                grams.push([
                    [l2 * (ds * ds + dtheta * dtheta), l2 * dtheta * dtheta],
                    [l2 * dtheta * dtheta, l2 * dtheta * dtheta],
                ]);
            }
        }
        let mut boundary = Vec::new();
        let (inner_label, inner_marker) = match self.inner {
            InnerCondition::Plate => (EdgeLabel::D0, "inner"),
            InnerCondition::Wall => (EdgeLabel::D1, "inner"),
        };
        for i in 0..self.n_theta {
            let ip = (i + 1) % cols;
            boundary.push(BoundaryEdge::new(self.vertex_id(0, i), self.vertex_id(0, ip), inner_label, inner_marker));
            boundary.push(BoundaryEdge::new(
                self.vertex_id(rings, i),
                self.vertex_id(rings, ip),
                EdgeLabel::D0,
                "outer",
            ));
        }
        if !self.periodic() {
            for k in 0..rings {
                boundary.push(BoundaryEdge::new(self.vertex_id(k, 0), self.vertex_id(k + 1, 0), EdgeLabel::D1, "wall"));
                boundary.push(BoundaryEdge::new(
                    self.vertex_id(k, self.n_theta),
                    self.vertex_id(k + 1, self.n_theta),
                    EdgeLabel::D1,
                    "wall",
                ));
            }
        }
        let mesh = MeshManifold::from_grams(vertices, triangles, boundary, grams)?;
        let k = (0..cols).map(|i| self.vertex_id(0, i)).collect();
        let origin_ring = self.ring_of_member[0].div_ceil(2).max(1).min(self.ring_of_member[0]);
        Ok(FamilyMember {
            mesh,
            k,
            outer_marker: "outer".into(),
            outer_radius,
            origin: self.vertex_id(origin_ring.min(rings), self.middle_column()),
        })
    }
}

impl MeshFamily for ConformalFamily {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn len(&self) -> usize {
        self.radii.len()
    }

    fn member(&self, j: usize) -> Result<FamilyMember, GeometryError> {
        if j == 0 || j > self.radii.len() {
            return Err(GeometryError::MeshingFailure(format!("member {j} outside 1..={}", self.radii.len())));
        }
        self.build(self.ring_of_member[j - 1], self.radii[j - 1])
    }
}

/// Exhaustion radii `2^(2^(j-1))`, `j = 1..=count`.
pub fn tower_radii(count: usize) -> Vec<f64> {
    (1..=count).map(|j| 2f64.powf(2f64.powi(j as i32 - 1))).collect()
}

impl ConformalFamily {
    pub fn flat_plane(n_theta: usize, count: usize) -> Result<Self, GeometryError> {
        let model = super::build_model(super::WarpKind::Euclidean, &[], 2, 1.0)?;
        Self::new("flat plane", model, 1.0, tower_radii(count), n_theta, InnerCondition::Plate)
    }

    pub fn flat_half_plane(n_theta: usize, count: usize, inner: InnerCondition) -> Result<Self, GeometryError> {
        let model = super::build_model(super::WarpKind::Euclidean, &[], 2, 0.5)?;
        Self::new("flat half-plane", model, 1.0, tower_radii(count), n_theta, inner)
    }

    pub fn euclidean_space(n_theta: usize, count: usize) -> Result<Self, GeometryError> {
        let model = super::build_model(super::WarpKind::Euclidean, &[], 3, 1.0)?;
        let radii = (1..=count).map(|j| 2f64.powi(j as i32)).collect();
        Self::new("euclidean 3-space", model, 1.0, radii, n_theta, InnerCondition::Plate)
    }

    pub fn hyperbolic_plane(n_theta: usize, count: usize) -> Result<Self, GeometryError> {
        let model = super::build_model(super::WarpKind::Hyperbolic, &[], 2, 1.0)?;
        let radii = (1..=count).map(|j| 1.0 + j as f64).collect();
        Self::new("hyperbolic plane", model, 1.0, radii, n_theta, InnerCondition::Plate)
    }

    pub fn hyperbolic_half_plane(n_theta: usize, count: usize, inner: InnerCondition) -> Result<Self, GeometryError> {
        let model = super::build_model(super::WarpKind::Hyperbolic, &[], 2, 0.5)?;
        let radii = (1..=count).map(|j| 1.0 + j as f64).collect();
        Self::new("hyperbolic half-plane", model, 1.0, radii, n_theta, inner)
    }

    pub fn cusp(n_theta: usize, count: usize) -> Result<Self, GeometryError> {
        let model = super::build_model(super::WarpKind::Cusp, &[], 2, 1.0)?;
        let radii = (1..=count).map(|j| 1.0 + 0.5 * j as f64).collect();
        Self::new("cusp", model, 1.0, radii, n_theta, InnerCondition::Plate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn members_are_nested() {
        let f = ConformalFamily::flat_half_plane(16, 4, InnerCondition::Plate).unwrap();
        let a = f.member(2).unwrap();
        let b = f.member(3).unwrap();
        assert!(a.mesh.n_vertices() < b.mesh.n_vertices());
        assert_eq!(a.k, b.k);
        assert_eq!(a.origin, b.origin);
        assert_eq!(&b.mesh.vertices()[..a.mesh.n_vertices()], a.mesh.vertices());
        assert_eq!(a.mesh.obtuse_count(), 0);
        assert_eq!(b.mesh.obtuse_count(), 0);
    }

    #[test]
    fn flat_member_area_matches_half_annulus() {
        let f = ConformalFamily::flat_half_plane(64, 1, InnerCondition::Plate).unwrap();
        let m = f.member(1).unwrap();
        let exact = 0.5 * PI * (4.0 - 1.0);
        assert!((m.mesh.total_area() - exact).abs() < 0.01 * exact);
    }

    #[test]
    fn profiles_invert() {
        for p in [
            ProfileWarp::Power { c: 1.0, m: 2 },
            ProfileWarp::Power { c: 2.0, m: 3 },
            ProfileWarp::Hyperbolic,
            ProfileWarp::Cusp,
        ] {
            for t in [1.0, 1.7, 3.2] {
                let r = p.r(p.s(t).unwrap()).unwrap();
                assert!((r - t).abs() < 1e-10 * t, "{p:?} {t} {r}");
            }
        }
    }

    #[test]
    fn numeric_profile_matches_closed_form() {
        let model = crate::geometry::build_model(crate::geometry::WarpKind::Power, &[1.0], 2, 1.0).unwrap();
        let p = ProfileWarp::for_model(&model, 1.0);
        assert!(matches!(p, ProfileWarp::Numeric { .. }));
        assert!((p.s(2.0).unwrap() - 2f64.ln()).abs() < 1e-9);
        assert!((p.r(2f64.ln()).unwrap() - 2.0).abs() < 1e-9);
    }
}
