//! Conforming P1 finite elements for `−div(A∇u) = 0` on convex polygons
//! with Dirichlet data.
//!
//! Meshes start from a fan around the polygon centroid and are refined
//! uniformly (red refinement), which keeps a nested hierarchy for the
//! multigrid preconditioner. Local refinement toward corners uses
//! longest-edge bisection instead; such meshes are solved with a symmetric
//! Gauss–Seidel preconditioner.

mod assemble;
mod coefficient;
mod mesh;
mod probes;
mod solution;
mod solver;

use thiserror::Error;

use crate::geometry::GeometryError;

pub use assemble::{assemble_stiffness, CsrMatrix};
pub use coefficient::{CoefficientField, MatrixField};
pub use mesh::{
    align_to_arcs, arc_edges, read_mesh, triangulate, triangulate_graded, write_mesh, BoundaryArc,
    BoundaryEdge, MeshHierarchy, TriMesh,
};
pub use probes::{
    corner_probe, corner_radii, gradient_probe, harmonic_measure, kernel_bound_probe,
    patch_nodal_data, sector_polygon, strip_probe, ArcRatio, CornerProbe, DiscretePoissonKernel,
    GradientProbe, GradientSample, KernelBoundProbe, StripProbe, StripRow, SECTOR_ARC_SEGMENTS,
};
pub use solution::{lp_error, solve_dirichlet, BoundaryData, DirichletProblem, FemSolution};
pub use solver::{solve_nodal, DirichletSolver, SolverConfig, SolverStats};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("mesh would exceed the vertex cap ({needed} > {cap})")]
    BudgetExceeded { needed: usize, cap: usize },
    #[error("iterative solver did not converge: relative residual {residual:e} after {iterations} iterations")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("coefficient matrix is not symmetric at ({x}, {y})")]
    NonSymmetricCoefficients { x: f64, y: f64 },
    #[error("coefficient eigenvalue {eigenvalue} at ({x}, {y}) is outside [1/c, c] for c = {c}")]
    NotElliptic {
        x: f64,
        y: f64,
        eigenvalue: f64,
        c: f64,
    },
    #[error("point ({x}, {y}) is outside the mesh")]
    OutsideDomain { x: f64, y: f64 },
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("malformed mesh file: {0}")]
    Parse(String),
}

impl FemError {
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            FemError::NoConvergence { .. } | FemError::BudgetExceeded { .. }
        )
    }
}

/// Default cap on mesh vertices.
pub const VERTEX_CAP: usize = 12_000_000;
