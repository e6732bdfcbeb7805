//! Harmonic measure, discrete Poisson kernel and corner-singularity probes.

use serde::Serialize;

use crate::geometry::planar::{self, P2};
use crate::geometry::ConvexPolytope;
use crate::stats::loglog_fit;

use super::solution::{locate_point, FemSolution};
use super::solver::{DirichletSolver, SolverConfig, SolverStats};
use super::{
    align_to_arcs, arc_edges, triangulate, triangulate_graded, BoundaryArc, BoundaryData,
    CoefficientField, FemError, TriMesh,
};

/// Nodal boundary data for the indicator of a union of boundary edges: a
/// boundary vertex gets the fraction of its incident boundary edges that lie
/// in the patch (so `1/2` at the patch ends), interior vertices get zero.
pub fn patch_nodal_data(mesh: &TriMesh, in_patch: &[bool]) -> Result<Vec<f64>, FemError> {
    if in_patch.len() != mesh.boundary_edges.len() {
        return Err(FemError::InvalidParameter(format!(
            "patch mask has {} entries for {} boundary edges",
            in_patch.len(),
            mesh.boundary_edges.len()
        )));
    }
    let mut hits = vec![0u32; mesh.n_vertices()];
    let mut deg = vec![0u32; mesh.n_vertices()];
    for (e, &inside) in mesh.boundary_edges.iter().zip(in_patch) {
        for v in e.v {
            deg[v as usize] += 1;
            hits[v as usize] += inside as u32;
        }
    }
    Ok(hits
        .iter()
        .zip(&deg)
        .map(|(&h, &d)| if d == 0 { 0.0 } else { h as f64 / d as f64 })
        .collect())
}

/// Discrete harmonic measure of the patch seen from `x`: the P1 solution
/// with the patch's nodal data, evaluated at `x`.
pub fn harmonic_measure(
    mesh: &TriMesh,
    coef: &CoefficientField,
    in_patch: &[bool],
    x: P2,
    config: SolverConfig,
) -> Result<f64, FemError> {
    let data = patch_nodal_data(mesh, in_patch)?;
    let solver = DirichletSolver::new(mesh, coef, config)?;
    let (values, stats) = solver.solve(&data)?;
    FemSolution::new(mesh.clone(), values, stats).evaluate(x)
}

/// Weights `w` with `u_h(x) = Σ_j w_j g_j` over boundary vertices `j`, for
/// every discrete harmonic `u_h` with boundary values `g`. Obtained from one
/// adjoint solve, so any number of patches can be measured afterwards.
#[derive(Clone, Debug)]
pub struct DiscretePoissonKernel {
    pub x: P2,
    /// `(boundary vertex, weight)`, sorted by vertex.
    pub weights: Vec<(u32, f64)>,
    pub stats: SolverStats,
}

impl DiscretePoissonKernel {
    pub fn new(
        mesh: &TriMesh,
        coef: &CoefficientField,
        x: P2,
        config: SolverConfig,
    ) -> Result<Self, FemError> {
        let solver = DirichletSolver::new(mesh, coef, config)?;
        Self::with_solver(&solver, mesh, x)
    }

    pub fn with_solver(solver: &DirichletSolver, mesh: &TriMesh, x: P2) -> Result<Self, FemError> {
        let (t, b) = locate_point(mesh, x)?;
        let tri = mesh.triangles[t];
        let mask = solver.boundary_mask();
        let mut load = vec![0.0; mesh.n_vertices()];
        let mut direct = Vec::new();
        for i in 0..3 {
            let v = tri[i] as usize;
            if mask[v] {
                direct.push((v, b[i]));
            } else {
                load[v] += b[i];
            }
        }
        // interior values are u_I = −K_II⁻¹ K_IB g, so the weights are
        // −K_BI z with K_II z = e_x
        let (z, stats) = solver.solve_load(&load)?;
        let mut w = vec![0.0; mesh.n_vertices()];
        for (j, s) in solver.boundary_coupling(&z) {
            w[j] -= s;
        }
        for (v, bi) in direct {
            w[v] += bi;
        }
        let weights = w
            .iter()
            .enumerate()
            .filter(|&(j, _)| mask[j])
            .map(|(j, &wj)| (j as u32, wj))
            .collect();
        Ok(Self { x, weights, stats })
    }

    /// `u_h(x)` for the given nodal boundary values.
    pub fn measure(&self, nodal: &[f64]) -> f64 {
        self.weights.iter().map(|&(j, w)| w * nodal[j as usize]).sum()
    }

    /// Sum of all weights; one up to solver tolerance.
    pub fn total(&self) -> f64 {
        self.weights.iter().map(|&(_, w)| w).sum()
    }

    /// Weight carried by each boundary edge under the fraction convention of
    /// [`patch_nodal_data`]: a vertex splits its weight evenly among its
    /// incident boundary edges.
    pub fn edge_masses(&self, mesh: &TriMesh) -> Vec<f64> {
        let mut deg = vec![0u32; mesh.n_vertices()];
        for e in &mesh.boundary_edges {
            for v in e.v {
                deg[v as usize] += 1;
            }
        }
        let mut w = vec![0.0; mesh.n_vertices()];
        for &(j, wj) in &self.weights {
            w[j as usize] = wj;
        }
        mesh.boundary_edges
            .iter()
            .map(|e| e.v.iter().map(|&v| w[v as usize] / deg[v as usize] as f64).sum())
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ArcRatio {
    pub face: usize,
    pub start: f64,
    pub end: f64,
    pub measure: f64,
    pub distance: f64,
    /// `ω(x, Δ) / (|Δ|·d(x)/dist(x, Δ)²)`.
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelBoundProbe {
    pub x: P2,
    pub d_x: f64,
    pub arcs: Vec<ArcRatio>,
    pub max_ratio: f64,
    pub total_mass: f64,
    pub stats: SolverStats,
}

/// Splits every face into arcs of length close to `ell`, measures each arc
/// from `x` with the discrete Poisson kernel and compares against the
/// Poisson-kernel scaling `|Δ|·d(x)/dist(x, Δ)²`.
pub fn kernel_bound_probe(
    poly: &ConvexPolytope,
    coef: &CoefficientField,
    x: P2,
    ell: f64,
    h: f64,
    config: SolverConfig,
) -> Result<KernelBoundProbe, FemError> {
    if !(ell > 0.0) {
        return Err(FemError::InvalidParameter(format!("arc length must be positive, got {ell}")));
    }
    if !(h < 0.5 * ell) {
        return Err(FemError::InvalidParameter(format!(
            "mesh size {h} must be below half the arc length {ell}"
        )));
    }
    let d_x = poly.distance_to_boundary(&x)?;
    if !(d_x > 0.0) {
        return Err(FemError::OutsideDomain { x: x[0], y: x[1] });
    }
    let mut arcs = Vec::new();
    for face in poly.faces() {
        let len = face.measure().unwrap_or(0.0);
        let n = (len / ell).round().max(1.0) as usize;
        for k in 0..n {
            arcs.push(BoundaryArc {
                face: face.index,
                start: len * k as f64 / n as f64,
                end: len * (k + 1) as f64 / n as f64,
            });
        }
    }
    let mut mesh = triangulate(poly, h, 0.0)?;
    align_to_arcs(&mut mesh, poly, &arcs)?;
    coef.validate(poly)?;
    let kernel = DiscretePoissonKernel::new(&mesh, coef, x, config)?;
    let masses = kernel.edge_masses(&mesh);
    let mut out = Vec::with_capacity(arcs.len());
    for arc in &arcs {
        let sel = arc_edges(&mesh, poly, std::slice::from_ref(arc))?;
        let measure: f64 = masses.iter().zip(&sel).filter(|(_, &s)| s).map(|(m, _)| m).sum();
        let face = poly.face(arc.face).expect("arc faces exist");
        let (a, b) = match face.shape {
            crate::geometry::FaceShape::Segment { start, end } => (start, end),
            _ => unreachable!("2-D faces are segments"),
        };
        let dir = planar::sub(b, a);
        let len = planar::len2(dir);
        let at = |s: f64| [a[0] + dir[0] * s / len, a[1] + dir[1] * s / len];
        let distance = planar::segment_distance(x, at(arc.start), at(arc.end));
        let scale = (arc.end - arc.start) * d_x / (distance * distance);
        out.push(ArcRatio {
            face: arc.face,
            start: arc.start,
            end: arc.end,
            measure,
            distance,
            ratio: measure / scale,
        });
    }
    let max_ratio = out.iter().map(|a| a.ratio).fold(0.0, f64::max);
    Ok(KernelBoundProbe {
        x,
        d_x,
        total_mass: kernel.total(),
        arcs: out,
        max_ratio,
        stats: kernel.stats,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct StripRow {
    pub rho: f64,
    /// Harmonic measure of the collar `Π_ρ` seen from `x`.
    pub measure: f64,
    /// `measure · d(x) / ρ`.
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StripProbe {
    pub x: P2,
    pub face: usize,
    pub d_x: f64,
    pub rows: Vec<StripRow>,
    /// Largest over smallest ratio.
    pub spread: f64,
    pub stats: SolverStats,
}

/// Harmonic measure of the collar `Π_ρ` of one face (the two end segments
/// of length `ρ`) for several `ρ`, from one discrete Poisson kernel on a
/// mesh aligned with every collar endpoint.
pub fn strip_probe(
    poly: &ConvexPolytope,
    coef: &CoefficientField,
    x: P2,
    face: usize,
    rhos: &[f64],
    h: f64,
    config: SolverConfig,
) -> Result<StripProbe, FemError> {
    let f = poly
        .face(face)
        .ok_or_else(|| FemError::InvalidParameter(format!("half-space {face} has no face")))?;
    let len = f.measure().unwrap_or(0.0);
    let min_rho = rhos.iter().copied().fold(f64::INFINITY, f64::min);
    if rhos.is_empty() || !(min_rho > 0.0) || rhos.iter().any(|&r| !(2.0 * r < len)) {
        return Err(FemError::InvalidParameter(format!(
            "collar widths must be positive and below half the face length {len}"
        )));
    }
    if !(h <= 0.5 * min_rho) {
        return Err(FemError::InvalidParameter(format!(
            "mesh size {h} must be at most half the smallest collar width {min_rho}"
        )));
    }
    let d_x = poly.distance_to_boundary(&x)?;
    if !(d_x > 0.0) {
        return Err(FemError::OutsideDomain { x: x[0], y: x[1] });
    }
    coef.validate(poly)?;
    let collar = |rho: f64| {
        [
            BoundaryArc { face, start: 0.0, end: rho },
            BoundaryArc { face, start: len - rho, end: len },
        ]
    };
    let all: Vec<BoundaryArc> = rhos.iter().flat_map(|&r| collar(r)).collect();
    let mut mesh = triangulate(poly, h, 0.0)?;
    align_to_arcs(&mut mesh, poly, &all)?;
    let kernel = DiscretePoissonKernel::new(&mesh, coef, x, config)?;
    let masses = kernel.edge_masses(&mesh);
    let mut rows = Vec::with_capacity(rhos.len());
    for &rho in rhos {
        let sel = arc_edges(&mesh, poly, &collar(rho))?;
        let measure: f64 = masses.iter().zip(&sel).filter(|(_, &s)| s).map(|(m, _)| m).sum();
        rows.push(StripRow {
            rho,
            measure,
            ratio: measure * d_x / rho,
        });
    }
    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r.ratio), hi.max(r.ratio)));
    Ok(StripProbe {
        x,
        face,
        d_x,
        rows,
        spread: hi / lo,
        stats: kernel.stats,
    })
}

/// Segments approximating the circular arc of [`sector_polygon`].
pub const SECTOR_ARC_SEGMENTS: usize = 64;

/// Convex sector of opening `omega < π` with apex at the origin, bisector on
/// the positive x-axis and unit radius; the arc is replaced by a polygonal
/// line.
pub fn sector_polygon(omega: f64) -> Result<ConvexPolytope, FemError> {
    if !(omega > 0.0 && omega < std::f64::consts::PI) {
        return Err(FemError::InvalidParameter(format!(
            "sector opening must lie in (0, π), got {omega}"
        )));
    }
    let mut v = vec![[0.0, 0.0]];
    for i in 0..=SECTOR_ARC_SEGMENTS {
        let t = -0.5 * omega + omega * i as f64 / SECTOR_ARC_SEGMENTS as f64;
        v.push([t.cos(), t.sin()]);
    }
    Ok(ConvexPolytope::from_vertices_2d(&v)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct CornerProbe {
    pub omega: f64,
    /// `π/ω − 1`.
    pub alpha_star: f64,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub gradients: Vec<f64>,
    /// Fitted exponent of `u(r)`; the leading singular term predicts `π/ω`.
    pub solution_exponent: f64,
    /// Fitted exponent of `|∇u(r)|`; predicted `π/ω − 1`.
    pub gradient_exponent: f64,
    pub n_vertices: usize,
    pub stats: SolverStats,
}

/// Sample radii `2^{-2}, …, 2^{-8}` along the bisector.
pub fn corner_radii() -> Vec<f64> {
    (2..=8).map(|j| 0.5f64.powi(j)).collect()
}

/// Solves the Dirichlet problem on [`sector_polygon`] with data one on the
/// arc and zero on the two radii, on a mesh graded toward the apex, and
/// fits the power laws of the solution and its gradient along the bisector.
pub fn corner_probe(omega: f64, h: f64, config: SolverConfig) -> Result<CornerProbe, FemError> {
    let poly = sector_polygon(omega)?;
    let mesh = triangulate_graded(&poly, h, 1.0, &[[0.0, 0.0]])?;
    let hs = poly.halfspaces();
    let on_arc: Vec<bool> = mesh
        .boundary_edges
        .iter()
        .map(|e| hs[e.face].offset().abs() > 1e-9)
        .collect();
    let data = patch_nodal_data(&mesh, &on_arc)?;
    let solver = DirichletSolver::new(&mesh, &CoefficientField::Identity, config)?;
    let (values, stats) = solver.solve(&data)?;
    drop(solver);
    let n_vertices = mesh.n_vertices();
    let sol = FemSolution::new(mesh, values, stats);
    let radii = corner_radii();
    let mut vals = Vec::with_capacity(radii.len());
    let mut grads = Vec::with_capacity(radii.len());
    for &r in &radii {
        vals.push(sol.evaluate([r, 0.0])?);
        grads.push(planar::len2(sol.gradient([r, 0.0])?));
    }
    let fit = |y: &[f64]| {
        loglog_fit(&radii, y).map(|f| f.slope).ok_or_else(|| {
            FemError::InvalidParameter("corner samples are not positive".into())
        })
    };
    Ok(CornerProbe {
        omega,
        alpha_star: std::f64::consts::PI / omega - 1.0,
        solution_exponent: fit(&vals)?,
        gradient_exponent: fit(&grads)?,
        radii,
        values: vals,
        gradients: grads,
        n_vertices,
        stats,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GradientSample {
    pub r: f64,
    pub d_star: f64,
    pub gradient: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GradientProbe {
    pub corner: P2,
    pub omega: f64,
    pub alpha_star: f64,
    pub samples: Vec<GradientSample>,
    /// Slope of `log |∇u|` against `log d_*`.
    pub exponent: f64,
    pub stats: SolverStats,
}

/// Gradient of the discrete solution along the bisector of polygon corner
/// `corner` (an index into the counterclockwise vertex list), at the given
/// distances from the corner. Meaningful when the data vanish on the two
/// faces meeting there; the singular behaviour is then `d_*^{α*}`.
pub fn gradient_probe(
    poly: &ConvexPolytope,
    coef: &CoefficientField,
    data: &BoundaryData,
    corner: usize,
    radii: &[f64],
    h: f64,
    config: SolverConfig,
) -> Result<GradientProbe, FemError> {
    let verts = poly.vertices_2d()?;
    let n = verts.len();
    if corner >= n {
        return Err(FemError::InvalidParameter(format!(
            "corner {corner} out of range for {n} vertices"
        )));
    }
    let c = verts[corner];
    let unit = |p: P2| {
        let d = planar::sub(p, c);
        let l = planar::len2(d);
        [d[0] / l, d[1] / l]
    };
    let (u, v) = (unit(verts[(corner + 1) % n]), unit(verts[(corner + n - 1) % n]));
    let omega = planar::dot2(u, v).clamp(-1.0, 1.0).acos();
    let b = [u[0] + v[0], u[1] + v[1]];
    let bl = planar::len2(b);
    let dir = [b[0] / bl, b[1] / bl];
    coef.validate(poly)?;
    let mesh = triangulate_graded(poly, h, 1.0, &[c])?;
    let nodal = data.nodal(&mesh)?;
    let solver = DirichletSolver::new(&mesh, coef, config)?;
    let (values, stats) = solver.solve(&nodal)?;
    drop(solver);
    let sol = FemSolution::new(mesh, values, stats);
    let mut samples = Vec::with_capacity(radii.len());
    for &r in radii {
        let x = [c[0] + r * dir[0], c[1] + r * dir[1]];
        let d_star = poly.distance_to_singular(&x)?;
        let g = sol.gradient(x)?;
        samples.push(GradientSample {
            r,
            d_star,
            gradient: planar::len2(g),
        });
    }
    let ds: Vec<f64> = samples.iter().map(|s| s.d_star).collect();
    let gs: Vec<f64> = samples.iter().map(|s| s.gradient).collect();
    let exponent = loglog_fit(&ds, &gs)
        .ok_or_else(|| FemError::InvalidParameter("need two or more positive samples".into()))?
        .slope;
    Ok(GradientProbe {
        corner: c,
        omega,
        alpha_star: std::f64::consts::PI / omega - 1.0,
        samples,
        exponent,
        stats,
    })
}
