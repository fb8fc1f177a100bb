//! Triangulated surfaces with labeled boundary and a per-triangle constant
//! metric.
//!
//! Every triangle carries its Gram matrix `M = E^T G E` in the edge frame
//! `e1 = p1 - p0`, `e2 = p2 - p0`. All lengths, areas, gradients and fluxes are
//! computed from `M`, so the chart coordinates only matter for display, for
//! serialization and for the exact Euclidean distance mode.

use super::GeometryError;
use crate::linalg::CsrMatrix;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

pub type Sym2 = [[f64; 2]; 2];

/// Boundary edge classes: `D0` is the artificial (exhaustion) boundary,
/// `D1` the boundary of the manifold itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeLabel {
    D0,
    D1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub v: [usize; 2],
    pub label: EdgeLabel,
    pub marker: String,
}

impl BoundaryEdge {
    pub fn new(a: usize, b: usize, label: EdgeLabel, marker: &str) -> Self {
        BoundaryEdge {
            v: [a, b],
            label,
            marker: marker.to_string(),
        }
    }
}

const NONE: usize = usize::MAX;

/// Relative size below which a stiffness coupling of the wrong sign counts
/// as a rounding artefact of a right angle.
pub const RIGHT_ANGLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct MeshManifold {
    ambient_dim: usize,
    vertices: Vec<[f64; 3]>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    metric: Option<Vec<Sym2>>,
    grams: Vec<Sym2>,
    edges: Vec<[usize; 2]>,
    edge_tris: Vec<[usize; 2]>,
    tri_edges: Vec<[usize; 3]>,
    edge_boundary: Vec<usize>,
    boundary_slot: Vec<(usize, usize)>,
    vt_offsets: Vec<usize>,
    vt_list: Vec<usize>,
    vertex_d0: Vec<bool>,
    vertex_d1: Vec<bool>,
}

impl PartialEq for MeshManifold {
    fn eq(&self, other: &Self) -> bool {
        self.ambient_dim == other.ambient_dim
            && self.vertices == other.vertices
            && self.triangles == other.triangles
            && self.boundary_edges == other.boundary_edges
            && self.metric == other.metric
    }
}

fn invariant(msg: impl Into<String>) -> GeometryError {
    GeometryError::InvariantViolation(msg.into())
}

fn det2(m: &Sym2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

impl MeshManifold {
    /// Builds and validates a mesh. With `metric = None` the metric is the
    /// one induced by the vertex coordinates.
    pub fn new(
        ambient_dim: usize,
        vertices: Vec<[f64; 3]>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
        metric: Option<Vec<Sym2>>,
    ) -> Result<Self, GeometryError> {
        if ambient_dim != 2 && ambient_dim != 3 {
            return Err(invariant(format!("ambient dimension {ambient_dim} not in {{2, 3}}")));
        }
        if metric.is_some() && ambient_dim != 2 {
            return Err(invariant("an explicit metric requires planar chart coordinates"));
        }
        let n = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= n) {
                return Err(invariant(format!("triangle {t} references a missing vertex")));
            }
        }
        let grams = triangles
            .iter()
            .enumerate()
            .map(|(t, tri)| {
                let p = |k: usize| vertices[tri[k]];
                let e1 = sub(p(1), p(0));
                let e2 = sub(p(2), p(0));
                match &metric {
                    Some(g) => {
                        let g = g.get(t).copied().unwrap_or([[f64::NAN; 2]; 2]);
                        let ge1 = [g[0][0] * e1[0] + g[0][1] * e1[1], g[1][0] * e1[0] + g[1][1] * e1[1]];
                        let ge2 = [g[0][0] * e2[0] + g[0][1] * e2[1], g[1][0] * e2[0] + g[1][1] * e2[1]];
                        let m12 = e1[0] * ge2[0] + e1[1] * ge2[1];
                        [[e1[0] * ge1[0] + e1[1] * ge1[1], m12], [m12, e2[0] * ge2[0] + e2[1] * ge2[1]]]
                    }
                    None => {
                        let m12 = dot3(e1, e2);
                        [[dot3(e1, e1), m12], [m12, dot3(e2, e2)]]
                    }
                }
            })
            .collect();
        if let Some(g) = &metric {
            if g.len() != triangles.len() {
                return Err(invariant("metric count differs from triangle count"));
            }
            for (t, m) in g.iter().enumerate() {
                let finite = m.iter().flatten().all(|x| x.is_finite());
                if !finite || m[0][1] != m[1][0] || m[0][0] <= 0.0 || det2(m) <= 0.0 {
                    return Err(invariant(format!("metric of triangle {t} is not symmetric positive definite")));
                }
            }
        }
        Self::assemble(ambient_dim, vertices, triangles, boundary_edges, metric, grams)
    }

    /// Builds a planar-chart mesh from Gram matrices given directly in each
    /// triangle's edge frame. The chart metric is derived from them.
    pub fn from_grams(
        vertices: Vec<[f64; 3]>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
        grams: Vec<Sym2>,
    ) -> Result<Self, GeometryError> {
        let n = vertices.len();
        if grams.len() != triangles.len() {
            return Err(invariant("gram count differs from triangle count"));
        }
        let mut metric = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= n) {
                return Err(invariant(format!("triangle {t} references a missing vertex")));
            }
            let e1 = sub(vertices[tri[1]], vertices[tri[0]]);
            let e2 = sub(vertices[tri[2]], vertices[tri[0]]);
            let d = e1[0] * e2[1] - e1[1] * e2[0];
            if d == 0.0 {
                return Err(invariant(format!("triangle {t} is degenerate in the chart")));
            }
            // rows of E^{-1}
            let inv = [[e2[1] / d, -e2[0] / d], [-e1[1] / d, e1[0] / d]];
            let m = grams[t];
            // G = E^{-T} M E^{-1}
            let mut g = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    let mut s = 0.0;
                    for a in 0..2 {
                        for b in 0..2 {
                            s += inv[a][i] * m[a][b] * inv[b][j];
                        }
                    }
                    g[i][j] = s;
                }
            }
            let off = 0.5 * (g[0][1] + g[1][0]);
            g[0][1] = off;
            g[1][0] = off;
            metric.push(g);
        }
        Self::assemble(2, vertices, triangles, boundary_edges, Some(metric), grams)
    }

    fn assemble(
        ambient_dim: usize,
        vertices: Vec<[f64; 3]>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
        metric: Option<Vec<Sym2>>,
        grams: Vec<Sym2>,
    ) -> Result<Self, GeometryError> {
        let n = vertices.len();
        if vertices.iter().flatten().any(|x| !x.is_finite()) {
            return Err(invariant("vertex coordinates must be finite"));
        }
        for (t, (tri, m)) in triangles.iter().zip(&grams).enumerate() {
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(invariant(format!("triangle {t} repeats a vertex")));
            }
            let d = det2(m);
            if !(d > 0.0) || !d.is_finite() {
                return Err(invariant(format!("triangle {t} is degenerate")));
            }
        }
        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_tris: Vec<[usize; 2]> = Vec::new();
        let mut edge_dir: Vec<[usize; 2]> = Vec::new();
        let mut tri_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut te = [0; 3];
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                let key = (a.min(b), a.max(b));
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_tris.push([NONE, NONE]);
                    edge_dir.push([NONE, NONE]);
                    edges.len() - 1
                });
                let slot = if edge_tris[e][0] == NONE {
                    0
                } else if edge_tris[e][1] == NONE {
                    1
                } else {
                    return Err(invariant(format!("edge ({a}, {b}) belongs to more than two triangles")));
                };
                edge_tris[e][slot] = t;
                edge_dir[e][slot] = a;
                te[k] = e;
            }
            tri_edges.push(te);
        }
        for (e, d) in edge_dir.iter().enumerate() {
            if d[1] != NONE && d[0] == d[1] {
                let [a, b] = edges[e];
                return Err(invariant(format!("inconsistent orientation across edge ({a}, {b})")));
            }
        }
        let mut edge_boundary = vec![NONE; edges.len()];
        let mut boundary_slot = Vec::with_capacity(boundary_edges.len());
        let mut vertex_d0 = vec![false; n];
        let mut vertex_d1 = vec![false; n];
        for (i, be) in boundary_edges.iter().enumerate() {
            let [a, b] = be.v;
            let e = edge_index
                .get(&(a.min(b), a.max(b)))
                .copied()
                .ok_or_else(|| invariant(format!("labeled edge ({a}, {b}) is not a mesh edge")))?;
            if edge_tris[e][1] != NONE {
                return Err(invariant(format!("labeled edge ({a}, {b}) is interior")));
            }
            if edge_boundary[e] != NONE {
                return Err(invariant(format!("edge ({a}, {b}) is labeled twice")));
            }
            edge_boundary[e] = i;
            let t = edge_tris[e][0];
            let k = tri_edges[t].iter().position(|&x| x == e).unwrap();
            boundary_slot.push((t, k));
            let flags = match be.label {
                EdgeLabel::D0 => &mut vertex_d0,
                EdgeLabel::D1 => &mut vertex_d1,
            };
            flags[a] = true;
            flags[b] = true;
        }
        for (e, et) in edge_tris.iter().enumerate() {
            if et[1] == NONE && edge_boundary[e] == NONE {
                let [a, b] = edges[e];
                return Err(invariant(format!("boundary edge ({a}, {b}) carries no label")));
            }
        }
        let mut counts = vec![0usize; n + 1];
        for tri in &triangles {
            for &v in tri {
                counts[v + 1] += 1;
            }
        }
        if let Some(v) = (0..n).find(|&v| counts[v + 1] == 0) {
            return Err(invariant(format!("vertex {v} belongs to no triangle")));
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let vt_offsets = counts.clone();
        let mut fill = counts;
        let mut vt_list = vec![0; vt_offsets[n]];
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                vt_list[fill[v]] = t;
                fill[v] += 1;
            }
        }
        Ok(MeshManifold {
            ambient_dim,
            vertices,
            triangles,
            boundary_edges,
            metric,
            grams,
            edges,
            edge_tris,
            tri_edges,
            edge_boundary,
            boundary_slot,
            vt_offsets,
            vt_list,
            vertex_d0,
            vertex_d1,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }
    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }
    pub fn vertex(&self, i: usize) -> [f64; 3] {
        self.vertices[i]
    }
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }
    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }
    pub fn metric(&self) -> Option<&[Sym2]> {
        self.metric.as_deref()
    }
    pub fn gram(&self, t: usize) -> Sym2 {
        self.grams[t]
    }
    pub fn grams(&self) -> &[Sym2] {
        &self.grams
    }
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }
    /// Triangles on either side of edge `e`; the second is `None` on the boundary.
    pub fn edge_triangles(&self, e: usize) -> (usize, Option<usize>) {
        let [a, b] = self.edge_tris[e];
        (a, if b == NONE { None } else { Some(b) })
    }
    /// Edge ids of triangle `t`; local edge `k` joins corners `k` and `k + 1`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.tri_edges[t]
    }
    /// Index into [`MeshManifold::boundary_edges`] for a boundary edge id.
    pub fn edge_boundary_index(&self, e: usize) -> Option<usize> {
        let b = self.edge_boundary[e];
        if b == NONE {
            None
        } else {
            Some(b)
        }
    }
    /// Triangle and local edge carrying boundary edge `i`.
    pub fn boundary_slot(&self, i: usize) -> (usize, usize) {
        self.boundary_slot[i]
    }
    pub fn vertex_triangles(&self, v: usize) -> &[usize] {
        &self.vt_list[self.vt_offsets[v]..self.vt_offsets[v + 1]]
    }
    pub fn is_d0_vertex(&self, v: usize) -> bool {
        self.vertex_d0[v]
    }
    pub fn is_d1_vertex(&self, v: usize) -> bool {
        self.vertex_d1[v]
    }
    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.vertex_d0[v] || self.vertex_d1[v]
    }

    pub fn area(&self, t: usize) -> f64 {
        0.5 * det2(&self.grams[t]).sqrt()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.area(t)).sum()
    }

    /// Metric length of the segment between two points given in the edge
    /// frame of triangle `t`.
    pub fn frame_length(&self, t: usize, a: [f64; 2], b: [f64; 2]) -> f64 {
        let d = [b[0] - a[0], b[1] - a[1]];
        let m = &self.grams[t];
        (d[0] * d[0] * m[0][0] + 2.0 * d[0] * d[1] * m[0][1] + d[1] * d[1] * m[1][1]).max(0.0).sqrt()
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let (t, _) = self.edge_triangles(e);
        let k = self.tri_edges[t].iter().position(|&x| x == e).unwrap();
        self.frame_length(t, CORNERS[k], CORNERS[(k + 1) % 3])
    }

    pub fn mean_edge_length(&self) -> f64 {
        (0..self.n_edges()).map(|e| self.edge_length(e)).sum::<f64>() / self.n_edges() as f64
    }

    pub fn total_edge_length(&self) -> f64 {
        (0..self.n_edges()).map(|e| self.edge_length(e)).sum()
    }

    /// Sorted vertices touching an edge with the given marker.
    pub fn vertices_with_marker(&self, marker: &str) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .boundary_edges
            .iter()
            .filter(|b| b.marker == marker)
            .flat_map(|b| b.v)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn vertices_with_label(&self, label: EdgeLabel) -> Vec<usize> {
        let flags = match label {
            EdgeLabel::D0 => &self.vertex_d0,
            EdgeLabel::D1 => &self.vertex_d1,
        };
        (0..self.n_vertices()).filter(|&v| flags[v]).collect()
    }

    pub fn markers(&self) -> Vec<String> {
        let mut m: Vec<String> = self.boundary_edges.iter().map(|b| b.marker.clone()).collect();
        m.sort();
        m.dedup();
        m
    }

    pub fn has_marker(&self, marker: &str) -> bool {
        self.boundary_edges.iter().any(|b| b.marker == marker)
    }

    /// Local P1 stiffness matrix of triangle `t` (cotangent weights in the
    /// triangle's metric).
    pub fn local_stiffness(&self, t: usize) -> [[f64; 3]; 3] {
        let m = &self.grams[t];
        let s = 1.0 / (2.0 * det2(m).sqrt());
        let k12 = -m[0][1] * s;
        let k01 = -(m[1][1] - m[0][1]) * s;
        let k02 = -(m[0][0] - m[0][1]) * s;
        let k00 = (m[0][0] + m[1][1] - 2.0 * m[0][1]) * s;
        [[k00, k01, k02], [k01, m[1][1] * s, k12], [k02, k12, m[0][0] * s]]
    }

    pub fn stiffness_matrix(&self) -> CsrMatrix {
        let mut trip = Vec::with_capacity(9 * self.n_triangles());
        for (t, tri) in self.triangles.iter().enumerate() {
            let k = self.local_stiffness(t);
            for a in 0..3 {
                for b in 0..3 {
                    trip.push((tri[a], tri[b], k[a][b]));
                }
            }
        }
        CsrMatrix::from_triplets(self.n_vertices(), self.n_vertices(), trip)
    }

    /// `S u`, evaluated triangle by triangle.
    pub fn apply_stiffness(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_vertices()];
        for (t, tri) in self.triangles.iter().enumerate() {
            let k = self.local_stiffness(t);
            for a in 0..3 {
                out[tri[a]] += k[a][0] * u[tri[0]] + k[a][1] * u[tri[1]] + k[a][2] * u[tri[2]];
            }
        }
        out
    }

    /// Lumped mass: a third of every incident triangle's area.
    pub fn lumped_mass(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.n_vertices()];
        for (t, tri) in self.triangles.iter().enumerate() {
            let a = self.area(t) / 3.0;
            for &v in tri {
                m[v] += a;
            }
        }
        m
    }

    /// Differential of a P1 field on triangle `t` in the edge frame.
    pub fn differential(&self, t: usize, u: &[f64]) -> [f64; 2] {
        let tri = self.triangles[t];
        [u[tri[1]] - u[tri[0]], u[tri[2]] - u[tri[0]]]
    }

    /// Raises a covector of triangle `t` to a vector (frame components).
    pub fn raise(&self, t: usize, d: [f64; 2]) -> [f64; 2] {
        let m = &self.grams[t];
        let det = det2(m);
        [(m[1][1] * d[0] - m[0][1] * d[1]) / det, (m[0][0] * d[1] - m[0][1] * d[0]) / det]
    }

    /// Metric inner product of two frame vectors in triangle `t`.
    pub fn inner(&self, t: usize, x: [f64; 2], y: [f64; 2]) -> f64 {
        let m = &self.grams[t];
        x[0] * (m[0][0] * y[0] + m[0][1] * y[1]) + x[1] * (m[1][0] * y[0] + m[1][1] * y[1])
    }

    pub fn gradient(&self, t: usize, u: &[f64]) -> [f64; 2] {
        self.raise(t, self.differential(t, u))
    }

    pub fn grad_norm_sq(&self, t: usize, u: &[f64]) -> f64 {
        let d = self.differential(t, u);
        let x = self.raise(t, d);
        d[0] * x[0] + d[1] * x[1]
    }

    /// Outward flux of the frame vector `x` through local edge `k` of `t`.
    pub fn edge_flux(&self, t: usize, k: usize, x: [f64; 2]) -> f64 {
        let a = CORNERS[k];
        let b = CORNERS[(k + 1) % 3];
        let tv = [b[0] - a[0], b[1] - a[1]];
        det2(&self.grams[t]).sqrt() * (x[0] * tv[1] - x[1] * tv[0])
    }

    /// Number of triangles with an obtuse angle (a positive off-diagonal
    /// stiffness entry beyond rounding).
    pub fn obtuse_count(&self) -> usize {
        (0..self.n_triangles()).filter(|&t| self.is_obtuse(t)).count()
    }

    pub fn is_obtuse(&self, t: usize) -> bool {
        let k = self.local_stiffness(t);
        let scale = k[0][0].abs() + k[1][1].abs() + k[2][2].abs();
        k[0][1] > RIGHT_ANGLE_TOL * scale || k[0][2] > RIGHT_ANGLE_TOL * scale || k[1][2] > RIGHT_ANGLE_TOL * scale
    }

    /// True when the metric is the Euclidean one of a planar chart.
    pub fn is_flat(&self) -> bool {
        self.ambient_dim == 2
            && match &self.metric {
                None => true,
                Some(g) => g.iter().all(|m| *m == [[1.0, 0.0], [0.0, 1.0]]),
            }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices() as i64 - self.n_edges() as i64 + self.n_triangles() as i64
    }

    /// Number of closed or open chains formed by the boundary edges.
    pub fn boundary_component_count(&self) -> usize {
        let n = self.n_vertices();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for b in &self.boundary_edges {
            let ra = find(&mut parent, b.v[0]);
            let rb = find(&mut parent, b.v[1]);
            parent[ra] = rb;
        }
        let mut roots: Vec<usize> = self
            .boundary_edges
            .iter()
            .map(|b| find(&mut parent, b.v[0]))
            .collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }

    /// Signed chart area of triangle `t` (planar charts only).
    pub fn chart_orientation(&self, t: usize) -> f64 {
        let tri = self.triangles[t];
        let e1 = sub(self.vertices[tri[1]], self.vertices[tri[0]]);
        let e2 = sub(self.vertices[tri[2]], self.vertices[tri[0]]);
        0.5 * (e1[0] * e2[1] - e1[1] * e2[0])
    }

    /// Vertex neighbours through mesh edges.
    pub fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.n_vertices()];
        for &[a, b] in &self.edges {
            nb[a].push(b);
            nb[b].push(a);
        }
        for l in &mut nb {
            l.sort_unstable();
        }
        nb
    }

    /// Uniform 1-to-4 subdivision at edge midpoints. Metrics are inherited
    /// from the parent triangle, so the child Gram matrices are exact.
    pub fn refine(&self) -> MeshManifold {
        let nv = self.n_vertices();
        let mut vertices = self.vertices.clone();
        for &[a, b] in &self.edges {
            let (p, q) = (self.vertices[a], self.vertices[b]);
            vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]), 0.5 * (p[2] + q[2])]);
        }
        let mid = |e: usize| nv + e;
        let mut triangles = Vec::with_capacity(4 * self.n_triangles());
        let mut grams = Vec::with_capacity(4 * self.n_triangles());
        let mut metric = self.metric.as_ref().map(|_| Vec::with_capacity(4 * self.n_triangles()));
        for (t, tri) in self.triangles.iter().enumerate() {
            let [e0, e1, e2] = self.tri_edges[t];
            let (m01, m12, m20) = (mid(e0), mid(e1), mid(e2));
            triangles.push([tri[0], m01, m20]);
            triangles.push([m01, tri[1], m12]);
            triangles.push([m20, m12, tri[2]]);
            triangles.push([m01, m12, m20]);
            let m = self.grams[t];
            let q = [[m[0][0] / 4.0, m[0][1] / 4.0], [m[1][0] / 4.0, m[1][1] / 4.0]];
            let c12 = (m[1][1] - m[0][1]) / 4.0;
            let centre = [[m[1][1] / 4.0, c12], [c12, (m[0][0] - 2.0 * m[0][1] + m[1][1]) / 4.0]];
            grams.extend_from_slice(&[q, q, q, centre]);
            if let (Some(out), Some(g)) = (metric.as_mut(), self.metric.as_ref()) {
                out.extend_from_slice(&[g[t]; 4]);
            }
        }
        let mut boundary_edges = Vec::with_capacity(2 * self.boundary_edges.len());
        for be in &self.boundary_edges {
            let [a, b] = be.v;
            let e = self.edge_index(a, b).expect("labeled edges are mesh edges");
            boundary_edges.push(BoundaryEdge { v: [a, mid(e)], label: be.label, marker: be.marker.clone() });
            boundary_edges.push(BoundaryEdge { v: [mid(e), b], label: be.label, marker: be.marker.clone() });
        }
        if self.ambient_dim == 3 {
            // Induced metric: recompute from the (planar) children.
            return MeshManifold::new(3, vertices, triangles, boundary_edges, None)
                .expect("refinement of a valid mesh is valid");
        }
        MeshManifold::assemble(self.ambient_dim, vertices, triangles, boundary_edges, metric, grams)
            .expect("refinement of a valid mesh is valid")
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let (lo, hi) = (a.min(b), a.max(b));
        self.vertex_triangles(lo).iter().find_map(|&t| {
            self.tri_edges[t].iter().copied().find(|&e| self.edges[e] == [lo, hi])
        })
    }
}

/// Corners of the reference triangle in edge-frame coordinates.
pub const CORNERS: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
