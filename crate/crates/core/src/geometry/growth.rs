//! Ball volumes and sphere lengths from piecewise-linear distance fields.

use super::{distance_field, GeometryError, MeshManifold, ScalarField, CORNERS};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub radius: f64,
    pub volume: f64,
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallGrowthTable {
    pub center: usize,
    pub rows: Vec<GrowthRow>,
}

impl BallGrowthTable {
    /// Relative mismatch between `vol(R_last) - vol(R_first)` and the
    /// trapezoid integral of the sphere lengths.
    pub fn coarea_defect(&self) -> f64 {
        let (first, last) = (self.rows[0], self.rows[self.rows.len() - 1]);
        let integral: f64 = self
            .rows
            .windows(2)
            .map(|w| 0.5 * (w[0].area + w[1].area) * (w[1].radius - w[0].radius))
            .sum();
        let dv = last.volume - first.volume;
        (dv - integral).abs() / dv.abs().max(f64::MIN_POSITIVE)
    }

    pub fn radii(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.radius).collect()
    }
}

/// `vol {r < R}` and `len {r = R}` at each radius, with `r` the distance
/// field from `o`.
pub fn ball_growth_samples(mesh: &MeshManifold, o: usize, radii: &[f64]) -> Result<BallGrowthTable, GeometryError> {
    let r = distance_field(mesh, o)?;
    ball_growth_with_distance(mesh, &r, o, radii)
}

pub fn ball_growth_with_distance(
    mesh: &MeshManifold,
    r: &ScalarField,
    o: usize,
    radii: &[f64],
) -> Result<BallGrowthTable, GeometryError> {
    r.check(mesh)?;
    let rmax = r.max();
    let mut prev = 0.0;
    for &radius in radii {
        if !(radius > prev) || radius > rmax {
            return Err(GeometryError::RadiusOutOfRange(radius));
        }
        prev = radius;
    }
    if radii.is_empty() {
        return Err(GeometryError::RadiusOutOfRange(f64::NAN));
    }
    let rows = radii
        .iter()
        .map(|&radius| GrowthRow {
            radius,
            volume: sublevel_area(mesh, &r.values, radius),
            area: level_set_length(mesh, &r.values, radius),
        })
        .collect();
    Ok(BallGrowthTable { center: o, rows })
}

/// Fraction of a triangle where the linear interpolant of `v` is below
/// `level`.
pub fn sublevel_fraction(v: [f64; 3], level: f64) -> f64 {
    let mut s = v;
    s.sort_by(f64::total_cmp);
    let [a, b, c] = s;
    if level <= a {
        0.0
    } else if level >= c {
        1.0
    } else if level <= b {
        (level - a) * (level - a) / ((b - a) * (c - a))
    } else {
        1.0 - (c - level) * (c - level) / ((c - a) * (c - b))
    }
}

/// Measure of `{u < level}`.
pub fn sublevel_area(mesh: &MeshManifold, u: &[f64], level: f64) -> f64 {
    mesh.triangles()
        .iter()
        .enumerate()
        .map(|(t, tri)| mesh.area(t) * sublevel_fraction([u[tri[0]], u[tri[1]], u[tri[2]]], level))
        .sum()
}

/// Length of `{u = level}` inside the interior of the surface. A level set
/// lying along an interior edge is shared half and half by its two
/// triangles; along a boundary edge it does not count.
pub fn level_set_length(mesh: &MeshManifold, u: &[f64], level: f64) -> f64 {
    let mut total = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let v = [u[tri[0]], u[tri[1]], u[tri[2]]];
        let on: Vec<usize> = (0..3).filter(|&k| v[k] == level).collect();
        match on.len() {
            3 => {}
            2 => {
                let (i, j) = (on[0], on[1]);
                let k = if (i + 1) % 3 == j { i } else { j };
                let e = mesh.triangle_edges(t)[k];
                if mesh.edge_triangles(e).1.is_some() {
                    total += 0.5 * mesh.frame_length(t, CORNERS[i], CORNERS[j]);
                }
            }
            _ => {
                let mut pts: Vec<[f64; 2]> = Vec::with_capacity(2);
                for k in 0..3 {
                    let l = (k + 1) % 3;
                    let (a, b) = (v[k], v[l]);
                    if (a < level && b > level) || (a > level && b < level) {
                        let s = (level - a) / (b - a);
                        let (p, q) = (CORNERS[k], CORNERS[l]);
                        pts.push([p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])]);
                    }
                }
                if on.len() == 1 && pts.len() == 1 {
                    pts.push(CORNERS[on[0]]);
                }
                if pts.len() == 2 {
                    total += mesh.frame_length(t, pts[0], pts[1]);
                }
            }
        }
    }
    total
}
