//! Potential theory on triangulated surfaces with boundary: condenser
//! capacities, parabolicity tests, weak maximum principles and divergence
//! identities, and prescribed mean curvature graphs.

pub mod calculus;
pub mod classify;
pub mod geometry;
pub mod graph;
pub mod linalg;
pub mod potential;
pub mod quad;
pub mod table;
