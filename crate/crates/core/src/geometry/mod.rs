//! Model manifolds, triangulated manifolds with boundary, mesh generation,
//! serialization, distance fields and ball-growth tables.

mod distance;
mod family;
mod field;
mod growth;
mod io;
mod mesh;
mod meshgen;
mod model;

pub use distance::{distance_field, distance_field_with, DistanceMode};
pub use family::{tower_radii, ConformalFamily, FamilyMember, InnerCondition, MeshFamily, ProfileWarp, Sector};
pub use field::{ScalarField, VectorField};
pub use growth::{
    ball_growth_samples, ball_growth_with_distance, level_set_length, sublevel_area, sublevel_fraction, BallGrowthTable,
    GrowthRow,
};
pub use io::{load_mesh, mesh_from_json, mesh_to_json, save_mesh};
pub use mesh::{BoundaryEdge, EdgeLabel, MeshManifold, Sym2, CORNERS, RIGHT_ANGLE_TOL};
pub use meshgen::{build_annulus_mesh, build_disk_mesh, build_halfdisk_mesh, refine};
pub use model::{build_model, unit_sphere_area, ModelManifold, Warp, WarpKind, R_PROBE};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("invalid warp: {0}")]
    InvalidWarp(String),
    #[error("sector fraction {0} outside (0, 1]")]
    InvalidFraction(f64),
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error("radius {0} out of range")]
    RadiusOutOfRange(f64),
    #[error("meshing failed: {0}")]
    MeshingFailure(String),
    #[error("mesh invariant violated: {0}")]
    InvariantViolation(String),
    #[error("mesh is disconnected: vertex {0} unreachable")]
    DisconnectedMesh(usize),
    #[error("field has {found} entries, mesh expects {expected}")]
    MeshMismatch { expected: usize, found: usize },
    #[error("field value {index} is not finite")]
    NonFinite { index: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}
