//! JSON mesh files.

use super::{BoundaryEdge, GeometryError, MeshManifold, Sym2};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

#[derive(Serialize, Deserialize)]
struct MeshFile {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    metric: Option<Vec<Sym2>>,
}

pub fn mesh_to_json(mesh: &MeshManifold) -> String {
    let dim = mesh.ambient_dim();
    let file = MeshFile {
        dim,
        vertices: mesh.vertices().iter().map(|p| p[..dim].to_vec()).collect(),
        triangles: mesh.triangles().to_vec(),
        boundary_edges: mesh.boundary_edges().to_vec(),
        metric: mesh.metric().map(|m| m.to_vec()),
    };
    serde_json::to_string(&file).expect("mesh serialization cannot fail")
}

pub fn mesh_from_json(text: &str) -> Result<MeshManifold, GeometryError> {
    let file: MeshFile = serde_json::from_str(text).map_err(|e| GeometryError::Parse(e.to_string()))?;
    let mut vertices = Vec::with_capacity(file.vertices.len());
    for (i, v) in file.vertices.iter().enumerate() {
        match v.as_slice() {
            [x, y] if file.dim == 2 => vertices.push([*x, *y, 0.0]),
            [x, y, z] => vertices.push([*x, *y, *z]),
            _ => {
                return Err(GeometryError::Parse(format!(
                    "vertex {i} has {} coordinates for dim {}",
                    v.len(),
                    file.dim
                )))
            }
        }
    }
    MeshManifold::new(file.dim, vertices, file.triangles, file.boundary_edges, file.metric)
}

/// Writes the mesh to `path` through a temporary file and an atomic rename.
pub fn save_mesh(mesh: &MeshManifold, path: impl AsRef<Path>) -> Result<(), GeometryError> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(mesh_to_json(mesh).as_bytes())?;
    tmp.persist(path).map_err(|e| GeometryError::Io(e.error))?;
    Ok(())
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<MeshManifold, GeometryError> {
    let text = std::fs::read_to_string(path)?;
    mesh_from_json(&text)
}
