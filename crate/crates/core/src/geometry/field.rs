use super::{GeometryError, MeshManifold};
use serde::{Deserialize, Serialize};

/// Piecewise-linear field: one value per vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Result<Self, GeometryError> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite { index });
        }
        Ok(ScalarField { values })
    }

    pub fn constant(mesh: &MeshManifold, c: f64) -> Self {
        ScalarField { values: vec![c; mesh.n_vertices()] }
    }

    pub fn from_fn(mesh: &MeshManifold, f: impl Fn([f64; 3]) -> f64) -> Self {
        ScalarField { values: mesh.vertices().iter().map(|&p| f(p)).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check(&self, mesh: &MeshManifold) -> Result<(), GeometryError> {
        if self.values.len() != mesh.n_vertices() {
            return Err(GeometryError::MeshMismatch { expected: mesh.n_vertices(), found: self.values.len() });
        }
        if let Some(index) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite { index });
        }
        Ok(())
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Piecewise-constant vector field: one vector per triangle, components in
/// the triangle's edge frame (`p1 - p0`, `p2 - p0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorField {
    pub vectors: Vec<[f64; 2]>,
}

impl VectorField {
    pub fn new(vectors: Vec<[f64; 2]>) -> Result<Self, GeometryError> {
        if let Some(index) = vectors.iter().position(|v| !(v[0].is_finite() && v[1].is_finite())) {
            return Err(GeometryError::NonFinite { index });
        }
        Ok(VectorField { vectors })
    }

    pub fn zero(mesh: &MeshManifold) -> Self {
        VectorField { vectors: vec![[0.0; 2]; mesh.n_triangles()] }
    }

    /// Gradient of a P1 field.
    pub fn gradient(mesh: &MeshManifold, u: &ScalarField) -> Self {
        VectorField { vectors: (0..mesh.n_triangles()).map(|t| mesh.gradient(t, &u.values)).collect() }
    }

    /// Frame components of a chart-constant vector `(vx, vy)` (planar charts).
    pub fn from_chart(mesh: &MeshManifold, f: impl Fn(usize) -> [f64; 2]) -> Self {
        let vectors = (0..mesh.n_triangles())
            .map(|t| {
                let tri = mesh.triangles()[t];
                let p = |k: usize| mesh.vertex(tri[k]);
                let e1 = [p(1)[0] - p(0)[0], p(1)[1] - p(0)[1]];
                let e2 = [p(2)[0] - p(0)[0], p(2)[1] - p(0)[1]];
                let d = e1[0] * e2[1] - e1[1] * e2[0];
                let v = f(t);
                [(v[0] * e2[1] - v[1] * e2[0]) / d, (e1[0] * v[1] - e1[1] * v[0]) / d]
            })
            .collect();
        VectorField { vectors }
    }

    pub fn check(&self, mesh: &MeshManifold) -> Result<(), GeometryError> {
        if self.vectors.len() != mesh.n_triangles() {
            return Err(GeometryError::MeshMismatch { expected: mesh.n_triangles(), found: self.vectors.len() });
        }
        if let Some(index) = self.vectors.iter().position(|v| !(v[0].is_finite() && v[1].is_finite())) {
            return Err(GeometryError::NonFinite { index });
        }
        Ok(())
    }

    /// Largest metric norm over triangles.
    pub fn sup_norm(&self, mesh: &MeshManifold) -> f64 {
        self.vectors
            .iter()
            .enumerate()
            .map(|(t, &x)| mesh.inner(t, x, x).max(0.0).sqrt())
            .fold(0.0, f64::max)
    }

    /// `∫ |X|²`.
    pub fn l2_norm_sq(&self, mesh: &MeshManifold) -> f64 {
        self.vectors.iter().enumerate().map(|(t, &x)| mesh.area(t) * mesh.inner(t, x, x)).sum()
    }
}
