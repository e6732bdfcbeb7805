//! Numerical laboratory for elliptic Dirichlet problems with rapidly
//! oscillating boundary data `g(x/ε)` on convex polytopes.
//!
//! The crate is split along the lines of the experiment pipeline:
//!
//! - [`geometry`]: half-space polytopes, faces, distances, corner angles,
//!   Diophantine certificates for face normals and the lattice partition of a
//!   face into projected cubes.
//! - [`periodic`]: boundary data as finite Fourier sums on the unit torus.
//! - [`oscillatory`]: closed-form oscillatory integrals over face patches, a
//!   quadrature oracle, decay envelopes and boundary equidistribution.
//! - [`fem`]: a two-dimensional P1 finite-element solver for `-div(A∇u) = 0`
//!   together with harmonic-measure and corner-singularity probes.
//! - [`harness`]: ε-sweeps, rate fitting and theoretical exponents.
//! - [`report`]: deterministic CSV / JSON / gnuplot emission.

pub mod fem;
pub mod geometry;
pub mod harness;
pub mod oscillatory;
pub mod periodic;
pub mod stats;
pub mod report;

mod error;

pub use error::Error;
pub use num_complex::Complex64;

pub type Result<T, E = Error> = std::result::Result<T, E>;
