//! Vertex distance fields from a source vertex.

use super::{GeometryError, MeshManifold, ScalarField, CORNERS};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMode {
    /// Exact Euclidean distance when the mesh is flat and star-shaped about
    /// the source, Steiner-augmented Dijkstra otherwise.
    Auto,
    /// Always use the Steiner graph.
    Steiner,
    /// Demand the exact mode; fails if it does not apply.
    Exact,
}

pub fn distance_field(mesh: &MeshManifold, o: usize) -> Result<ScalarField, GeometryError> {
    distance_field_with(mesh, o, DistanceMode::Auto)
}

pub fn distance_field_with(mesh: &MeshManifold, o: usize, mode: DistanceMode) -> Result<ScalarField, GeometryError> {
    if o >= mesh.n_vertices() {
        return Err(GeometryError::InvariantViolation(format!("source vertex {o} does not exist")));
    }
    let exact_ok = mesh.is_flat() && star_shaped_about(mesh, o);
    match mode {
        DistanceMode::Exact if !exact_ok => Err(GeometryError::InvariantViolation(
            "exact distance needs a flat mesh that is star-shaped about the source".into(),
        )),
        DistanceMode::Exact | DistanceMode::Auto if exact_ok => {
            let p = mesh.vertex(o);
            Ok(ScalarField {
                values: mesh.vertices().iter().map(|q| (q[0] - p[0]).hypot(q[1] - p[1])).collect(),
            })
        }
        _ => steiner_dijkstra(mesh, o),
    }
}

/// True when `o` lies on the inner side of every boundary edge, i.e. in the
/// kernel of the (planar) mesh domain.
fn star_shaped_about(mesh: &MeshManifold, o: usize) -> bool {
    let p = mesh.vertex(o);
    (0..mesh.boundary_edges().len()).all(|i| {
        let (t, k) = mesh.boundary_slot(i);
        let tri = mesh.triangles()[t];
        let a = mesh.vertex(tri[k]);
        let b = mesh.vertex(tri[(k + 1) % 3]);
        let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        let len2 = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
        cross >= -1e-12 * len2
    })
}

/// Frame position of node `slot` of a triangle: corners, then the
/// midpoints of local edges.
fn node_pos(slot: usize) -> [f64; 2] {
    if slot < 3 {
        CORNERS[slot]
    } else {
        let (a, b) = (CORNERS[slot - 3], CORNERS[(slot - 2) % 3]);
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra over vertices and edge midpoints, with every pair of the six
/// nodes of a triangle joined by its metric straight-line length.
fn steiner_dijkstra(mesh: &MeshManifold, o: usize) -> Result<ScalarField, GeometryError> {
    let nv = mesh.n_vertices();
    let total = nv + mesh.n_edges();
    let mut dist = vec![f64::INFINITY; total];
    let mut done = vec![false; total];
    let mut heap = BinaryHeap::new();
    dist[o] = 0.0;
    heap.push(Item(0.0, o));
    let mut tris_buf: Vec<usize> = Vec::new();
    while let Some(Item(d, node)) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        tris_buf.clear();
        if node < nv {
            tris_buf.extend_from_slice(mesh.vertex_triangles(node));
        } else {
            let (a, b) = mesh.edge_triangles(node - nv);
            tris_buf.push(a);
            tris_buf.extend(b);
        }
        for &t in &tris_buf {
            let tri = mesh.triangles()[t];
            let te = mesh.triangle_edges(t);
            let ids = [tri[0], tri[1], tri[2], nv + te[0], nv + te[1], nv + te[2]];
            let me = ids.iter().position(|&x| x == node).unwrap();
            let pm = node_pos(me);
            for (slot, &other) in ids.iter().enumerate() {
                if slot == me || done[other] {
                    continue;
                }
                let nd = d + mesh.frame_length(t, pm, node_pos(slot));
                if nd < dist[other] {
                    dist[other] = nd;
                    heap.push(Item(nd, other));
                }
            }
        }
    }
    dist.truncate(nv);
    if let Some(v) = dist.iter().position(|d| !d.is_finite()) {
        return Err(GeometryError::DisconnectedMesh(v));
    }
    Ok(ScalarField { values: dist })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_annulus_mesh, build_disk_mesh, BoundaryEdge, EdgeLabel};

    #[test]
    fn exact_mode_on_disk() {
        let m = build_disk_mesh(1.0, 0.1).unwrap();
        let d = distance_field(&m, 0).unwrap();
        assert_eq!(d.values[0], 0.0);
        let v = m.vertices().iter().position(|p| (p[0] - 1.0).abs() < 1e-12 && p[1].abs() < 1e-12).unwrap();
        assert!((d.values[v] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn steiner_overestimates_boundedly() {
        let m = build_disk_mesh(1.0, 0.1).unwrap();
        let exact = distance_field_with(&m, 0, DistanceMode::Exact).unwrap();
        let graph = distance_field_with(&m, 0, DistanceMode::Steiner).unwrap();
        for (g, e) in graph.values.iter().zip(&exact.values) {
            assert!(*g >= e - 1e-12);
            if *e > 0.0 {
                assert!(g / e - 1.0 <= 0.08);
            }
        }
    }

    #[test]
    fn annulus_is_not_star_shaped() {
        let m = build_annulus_mesh(1.0, 2.0, 0.2).unwrap();
        assert!(distance_field_with(&m, 0, DistanceMode::Exact).is_err());
        assert!(distance_field(&m, 0).is_ok());
    }

    #[test]
    fn disconnected_mesh_is_reported() {
        let v = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [5.0, 0.0, 0.0],
            [6.0, 0.0, 0.0],
            [5.0, 1.0, 0.0],
        ];
        let mut b = Vec::new();
        for t in [[0, 1, 2], [3, 4, 5]] {
            for k in 0..3 {
                b.push(BoundaryEdge::new(t[k], t[(k + 1) % 3], EdgeLabel::D0, "x"));
            }
        }
        let m = MeshManifold::new(2, v, vec![[0, 1, 2], [3, 4, 5]], b, None).unwrap();
        assert!(matches!(
            distance_field_with(&m, 0, DistanceMode::Steiner),
            Err(GeometryError::DisconnectedMesh(_))
        ));
    }
}
