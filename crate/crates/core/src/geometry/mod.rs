//! Convex polytopes in half-space form and the face-level constructions used
//! by the oscillatory and solver modules.
//!
//! A polytope is `D = ∩_j { x : ν_j · x > c_j }` with unit (inward) normals
//! `ν_j`. All predicates use the absolute tolerance [`GEOM_TOL`]; inputs are
//! expected to be scaled to diameter `O(1)`.

mod diophantine;
mod partition;
pub mod planar;
mod polytope;

use thiserror::Error;

pub use diophantine::{
    certify_polytope, diophantine_check, DiophantineCert, PolytopeCertificate, DIOPHANTINE_ZERO,
};
pub use partition::{
    face_strip_membership, lattice_partition, FacePartition, FacePiece, PartitionCell,
};
pub use polytope::{
    build_polytope, AngleReport, ConvexPolytope, Face, FaceShape, HalfSpace, PlaneFrame,
    PolytopeDoc,
};

/// Absolute tolerance for geometric predicates on unit-scale inputs.
pub const GEOM_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("normal vector has norm {norm}, expected 1 within 1e-12")]
    BadNormal { norm: f64 },
    #[error("half-space list is empty")]
    NoHalfSpaces,
    #[error("dimension {0} is below 2")]
    DimensionTooSmall(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("half-spaces {0} and {1} coincide")]
    DuplicateHalfSpace(usize, usize),
    #[error("polytope is unbounded")]
    Unbounded,
    #[error("polytope has empty interior")]
    EmptyInterior,
    #[error("point lies outside the polytope (slack {slack:e} on half-space {index})")]
    OutsideDomain { index: usize, slack: f64 },
    #[error("operation not supported in dimension {0}")]
    UnsupportedDimension(usize),
    #[error("point is off the face hyperplane by {0:e}")]
    OffHyperplane(f64),
    #[error("normal component {axis} is zero; cannot eliminate that axis")]
    ZeroNormalComponent { axis: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("linear program failed: {0}")]
    LinearProgram(String),
    #[error("malformed polytope document: {0}")]
    Parse(String),
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Distance from `p` to the closed segment `[a, b]` in any dimension.
pub fn point_segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    let ap: Vec<f64> = p.iter().zip(a).map(|(x, y)| x - y).collect();
    let len2 = dot(&ab, &ab);
    if len2 == 0.0 {
        return norm(&ap);
    }
    let t = (dot(&ap, &ab) / len2).clamp(0.0, 1.0);
    let proj: Vec<f64> = a.iter().zip(&ab).map(|(x, d)| x + t * d).collect();
    dist(p, &proj)
}
