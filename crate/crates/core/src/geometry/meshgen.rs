//! Flat ring meshes: concentric polygonal rings stitched by a zipper that
//! always takes the shorter new diagonal.

use super::{BoundaryEdge, EdgeLabel, GeometryError, MeshManifold};
use std::f64::consts::PI;

struct RingPoint {
    id: usize,
    x: f64,
    y: f64,
    theta: f64,
}

fn dist(a: &RingPoint, b: &RingPoint) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Stitches ring `a` (inner) to ring `b` (outer). Closed rings wrap around;
/// open arcs run from their first to their last point.
fn zipper(a: &[RingPoint], b: &[RingPoint], closed: bool, tris: &mut Vec<[usize; 3]>) {
    let (aa, bb, p, q): (Vec<&RingPoint>, Vec<&RingPoint>, usize, usize) = if closed {
        let a0 = a[0].theta;
        let wrap = |d: f64| ((d + PI).rem_euclid(2.0 * PI) - PI).abs();
        let j0 = (0..b.len())
            .min_by(|&i, &j| wrap(b[i].theta - a0).total_cmp(&wrap(b[j].theta - a0)))
            .unwrap();
        let aa = a.iter().chain(std::iter::once(&a[0])).collect();
        let bb = (0..=b.len()).map(|j| &b[(j0 + j) % b.len()]).collect();
        (aa, bb, a.len(), b.len())
    } else {
        (a.iter().collect(), b.iter().collect(), a.len() - 1, b.len() - 1)
    };
    let (mut i, mut j) = (0, 0);
    while i < p || j < q {
        let inner = if i == p {
            false
        } else if j == q {
            true
        } else if !closed && i == 0 && j == 0 {
            false
        } else if !closed && j == q - 1 {
            true
        } else {
            dist(aa[i + 1], bb[j]) < dist(aa[i], bb[j + 1])
        };
        if inner {
            tris.push([aa[i].id, aa[i + 1].id, bb[j].id]);
            i += 1;
        } else {
            tris.push([aa[i].id, bb[j + 1].id, bb[j].id]);
            j += 1;
        }
    }
}

fn push_ring(vertices: &mut Vec<[f64; 3]>, r: f64, thetas: impl Iterator<Item = f64>) -> Vec<RingPoint> {
    thetas
        .map(|theta| {
            let (x, y) = (r * theta.cos(), r * theta.sin());
            vertices.push([x, y, 0.0]);
            RingPoint { id: vertices.len() - 1, x, y, theta }
        })
        .collect()
}

fn orient(vertices: &[[f64; 3]], tris: &mut [[usize; 3]]) {
    for t in tris.iter_mut() {
        let (a, b, c) = (vertices[t[0]], vertices[t[1]], vertices[t[2]]);
        let s = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        if s < 0.0 {
            t.swap(1, 2);
        }
    }
}

fn closed_loop(ring: &[RingPoint], label: EdgeLabel, marker: &str) -> Vec<BoundaryEdge> {
    (0..ring.len())
        .map(|i| BoundaryEdge::new(ring[i].id, ring[(i + 1) % ring.len()].id, label, marker))
        .collect()
}

fn check_positive(name: &str, v: f64) -> Result<(), GeometryError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(GeometryError::MeshingFailure(format!("{name} must be positive and finite, got {v}")))
    }
}

const MAX_VERTICES: f64 = 5e6;

/// Disk of the given radius centred at the origin: a centre vertex and `K`
/// rings of `6k` points. The rim is `D0` with marker `"outer"`.
pub fn build_disk_mesh(radius: f64, h: f64) -> Result<MeshManifold, GeometryError> {
    check_positive("radius", radius)?;
    check_positive("h", h)?;
    let rings = (radius / (h * 3f64.sqrt() / 2.0)).ceil().max(1.0);
    if 3.0 * rings * rings > MAX_VERTICES {
        return Err(GeometryError::MeshingFailure(format!("h = {h} gives too many vertices")));
    }
    let rings = rings as usize;
    let mut vertices = vec![[0.0, 0.0, 0.0]];
    let mut tris = Vec::new();
    let mut prev: Vec<RingPoint> = Vec::new();
    for k in 1..=rings {
        let n = 6 * k;
        let r = radius * k as f64 / rings as f64;
        let ring = push_ring(&mut vertices, r, (0..n).map(|i| 2.0 * PI * i as f64 / n as f64));
        if k == 1 {
            for i in 0..n {
                tris.push([0, ring[i].id, ring[(i + 1) % n].id]);
            }
        } else {
            zipper(&prev, &ring, true, &mut tris);
        }
        prev = ring;
    }
    orient(&vertices, &mut tris);
    let boundary = closed_loop(&prev, EdgeLabel::D0, "outer");
    MeshManifold::new(2, vertices, tris, boundary, None)
}

/// Annulus `a < |x| < b`: geometrically spaced rings of equal point count,
/// alternate rings rotated by half a step. Both circles are `D0`, with
/// markers `"inner"` and `"outer"`.
pub fn build_annulus_mesh(a: f64, b: f64, h: f64) -> Result<MeshManifold, GeometryError> {
    check_positive("a", a)?;
    check_positive("h", h)?;
    if !(b > a) || !b.is_finite() {
        return Err(GeometryError::MeshingFailure(format!("need 0 < a < b, got a = {a}, b = {b}")));
    }
    let n = (2.0 * PI * (a * b).sqrt() / h).ceil().max(6.0);
    let step = 2.0 * PI / n;
    let layers = ((b / a).ln() / (1.0 + step * 3f64.sqrt() / 2.0).ln()).round().max(1.0);
    if n * (layers + 1.0) > MAX_VERTICES {
        return Err(GeometryError::MeshingFailure(format!("h = {h} gives too many vertices")));
    }
    let (n, layers) = (n as usize, layers as usize);
    let mut vertices = Vec::with_capacity(n * (layers + 1));
    let mut tris = Vec::new();
    let mut rings: Vec<Vec<RingPoint>> = Vec::new();
    for k in 0..=layers {
        let r = if k == layers { b } else { a * (b / a).powf(k as f64 / layers as f64) };
        let offset = if k % 2 == 1 { 0.5 * step } else { 0.0 };
        let ring = push_ring(&mut vertices, r, (0..n).map(|i| step * i as f64 + offset));
        if let Some(prev) = rings.last() {
            zipper(prev, &ring, true, &mut tris);
        }
        rings.push(ring);
    }
    orient(&vertices, &mut tris);
    let mut boundary = closed_loop(&rings[0], EdgeLabel::D0, "inner");
    boundary.extend(closed_loop(&rings[layers], EdgeLabel::D0, "outer"));
    MeshManifold::new(2, vertices, tris, boundary, None)
}

/// Upper half-disk: the diameter is the true boundary (`D1`, marker
/// `"wall"`), the semicircle the artificial one (`D0`, marker `"outer"`).
/// Vertex 0 is the centre of the diameter.
pub fn build_halfdisk_mesh(radius: f64, h: f64) -> Result<MeshManifold, GeometryError> {
    check_positive("radius", radius)?;
    check_positive("h", h)?;
    let rings = (radius / (h * 3f64.sqrt() / 2.0)).ceil().max(1.0);
    if 1.5 * rings * rings > MAX_VERTICES {
        return Err(GeometryError::MeshingFailure(format!("h = {h} gives too many vertices")));
    }
    let rings = rings as usize;
    let mut vertices = vec![[0.0, 0.0, 0.0]];
    let mut tris = Vec::new();
    let mut boundary = Vec::new();
    let mut prev: Vec<RingPoint> = Vec::new();
    for k in 1..=rings {
        let n = 3 * k;
        let r = radius * k as f64 / rings as f64;
        let ring = push_ring(&mut vertices, r, (0..=n).map(|i| PI * i as f64 / n as f64));
        let (first, last) = (ring[0].id, ring[n].id);
        if k == 1 {
            for i in 0..n {
                tris.push([0, ring[i].id, ring[i + 1].id]);
            }
            boundary.push(BoundaryEdge::new(0, first, EdgeLabel::D1, "wall"));
            boundary.push(BoundaryEdge::new(last, 0, EdgeLabel::D1, "wall"));
        } else {
            zipper(&prev, &ring, false, &mut tris);
            boundary.push(BoundaryEdge::new(prev[0].id, first, EdgeLabel::D1, "wall"));
            boundary.push(BoundaryEdge::new(last, prev[prev.len() - 1].id, EdgeLabel::D1, "wall"));
        }
        prev = ring;
    }
    for i in 0..prev.len() - 1 {
        boundary.push(BoundaryEdge::new(prev[i].id, prev[i + 1].id, EdgeLabel::D0, "outer"));
    }
    orient(&vertices, &mut tris);
    MeshManifold::new(2, vertices, tris, boundary, None)
}

/// Uniform 1-to-4 refinement; see [`MeshManifold::refine`].
pub fn refine(mesh: &MeshManifold) -> MeshManifold {
    mesh.refine()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boundary_length(m: &MeshManifold, label: EdgeLabel) -> f64 {
        m.boundary_edges()
            .iter()
            .filter(|b| b.label == label)
            .map(|b| {
                let (p, q) = (m.vertex(b.v[0]), m.vertex(b.v[1]));
                (p[0] - q[0]).hypot(p[1] - q[1])
            })
            .sum()
    }

    #[test]
    fn disk_area_and_quality() {
        let m = build_disk_mesh(1.0, 0.1).unwrap();
        assert!((m.total_area() - PI).abs() < 0.02 * PI);
        assert_eq!(m.obtuse_count(), 0);
        assert_eq!(m.euler_characteristic(), 1);
        assert!(m.vertices_with_label(EdgeLabel::D1).is_empty());
    }

    #[test]
    fn annulus_topology() {
        let m = build_annulus_mesh(1.0, 2.0, 0.05).unwrap();
        assert_eq!(m.euler_characteristic(), 0);
        assert_eq!(m.boundary_component_count(), 2);
        assert_eq!(m.obtuse_count(), 0);
        assert!((m.total_area() - 3.0 * PI).abs() < 0.02 * 3.0 * PI);
    }

    #[test]
    fn halfdisk_wall_length() {
        let m = build_halfdisk_mesh(1.0, 0.1).unwrap();
        assert!((boundary_length(&m, EdgeLabel::D1) - 2.0).abs() < 0.04);
        assert_eq!(m.obtuse_count(), 0);
        assert_eq!(m.boundary_component_count(), 1);
    }

    #[test]
    fn bad_parameters_fail() {
        assert!(matches!(build_annulus_mesh(2.0, 1.0, 0.1), Err(GeometryError::MeshingFailure(_))));
        assert!(matches!(build_disk_mesh(1.0, 0.0), Err(GeometryError::MeshingFailure(_))));
        assert!(matches!(build_halfdisk_mesh(-1.0, 0.1), Err(GeometryError::MeshingFailure(_))));
    }
}
