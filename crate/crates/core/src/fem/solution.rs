use std::fmt;
use std::io::Write;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::geometry::planar::{self, P2};
use crate::geometry::ConvexPolytope;
use crate::periodic::PeriodicFunction;

use super::solver::{DirichletSolver, SolverConfig, SolverStats};
use super::{CoefficientField, FemError, TriMesh};

const CHUNK: usize = 1 << 14;

/// Dirichlet data on `∂D`.
#[derive(Clone)]
pub enum BoundaryData {
    /// Trace `g(x/ε)` of real-valued periodic data.
    Periodic { g: PeriodicFunction, epsilon: f64 },
    Function(Arc<dyn Fn(P2) -> f64 + Send + Sync>),
}

impl fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Periodic { epsilon, .. } => write!(f, "Periodic(epsilon = {epsilon})"),
            Self::Function(_) => write!(f, "Function"),
        }
    }
}

impl BoundaryData {
    pub fn function(f: impl Fn(P2) -> f64 + Send + Sync + 'static) -> Self {
        Self::Function(Arc::new(f))
    }

    pub fn constant(v: f64) -> Self {
        Self::function(move |_| v)
    }

    fn check(&self) -> Result<(), FemError> {
        if let Self::Periodic { g, epsilon } = self {
            if !(*epsilon > 0.0) {
                return Err(FemError::InvalidParameter(format!(
                    "epsilon must be positive, got {epsilon}"
                )));
            }
            if g.dim() != 2 {
                return Err(FemError::InvalidParameter(format!(
                    "boundary data has dimension {}, expected 2",
                    g.dim()
                )));
            }
            if !g.is_real_valued() {
                return Err(FemError::InvalidParameter(
                    "periodic boundary data must be real-valued".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn value(&self, p: P2) -> f64 {
        match self {
            Self::Periodic { g, epsilon } => g.evaluate_real(&[p[0] / epsilon, p[1] / epsilon]),
            Self::Function(f) => f(p),
        }
    }

    /// Values at boundary vertices; interior entries are zero.
    pub fn nodal(&self, mesh: &TriMesh) -> Result<Vec<f64>, FemError> {
        self.check()?;
        let mask = mesh.boundary_mask();
        Ok(mesh
            .vertices
            .par_iter()
            .zip(&mask)
            .map(|(&p, &b)| if b { self.value(p) } else { 0.0 })
            .collect())
    }
}

#[derive(Clone, Debug)]
pub struct DirichletProblem {
    pub polygon: ConvexPolytope,
    pub coefficient: CoefficientField,
    pub data: BoundaryData,
}

/// Nodal P1 solution with solver diagnostics.
#[derive(Debug)]
pub struct FemSolution {
    pub mesh: TriMesh,
    pub values: Vec<f64>,
    pub stats: SolverStats,
    locator: OnceLock<Locator>,
}

/// Solves `−div(A∇u) = 0` with the problem's boundary data on `mesh`.
pub fn solve_dirichlet(
    problem: &DirichletProblem,
    mesh: TriMesh,
    config: SolverConfig,
) -> Result<FemSolution, FemError> {
    if problem.polygon.dim() != 2 {
        return Err(crate::geometry::GeometryError::UnsupportedDimension(problem.polygon.dim()).into());
    }
    problem.coefficient.validate(&problem.polygon)?;
    let data = problem.data.nodal(&mesh)?;
    let solver = DirichletSolver::new(&mesh, &problem.coefficient, config)?;
    let (values, stats) = solver.solve(&data)?;
    drop(solver);
    Ok(FemSolution::new(mesh, values, stats))
}

/// `(Σ_T |T|/3 Σ_{edge midpoints} |u − ḡ|^p)^{1/p}`.
pub fn lp_error(sol: &FemSolution, gbar: f64, p: f64) -> f64 {
    sol.lp_error(gbar, p)
}

fn sqrt15() -> f64 {
    15f64.sqrt()
}

/// Degree-5 seven-point rule on a triangle: barycentric points and weights
/// (weights sum to one).
fn seven_point_rule() -> [([f64; 3], f64); 7] {
    let s = sqrt15();
    let a1 = (9.0 - 2.0 * s) / 21.0;
    let b1 = (6.0 + s) / 21.0;
    let a2 = (9.0 + 2.0 * s) / 21.0;
    let b2 = (6.0 - s) / 21.0;
    let w1 = (155.0 + s) / 1200.0;
    let w2 = (155.0 - s) / 1200.0;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
        ([a1, b1, b1], w1),
        ([b1, a1, b1], w1),
        ([b1, b1, a1], w1),
        ([a2, b2, b2], w2),
        ([b2, a2, b2], w2),
        ([b2, b2, a2], w2),
    ]
}

impl FemSolution {
    pub fn new(mesh: TriMesh, values: Vec<f64>, stats: SolverStats) -> Self {
        Self {
            mesh,
            values,
            stats,
            locator: OnceLock::new(),
        }
    }

    fn locator(&self) -> &Locator {
        self.locator.get_or_init(|| Locator::new(&self.mesh))
    }

    /// Containing triangle (lowest index on ties) and barycentric weights.
    pub fn locate(&self, x: P2) -> Result<(usize, [f64; 3]), FemError> {
        self.locator()
            .locate(&self.mesh, x)
            .ok_or(FemError::OutsideDomain { x: x[0], y: x[1] })
    }

    /// Barycentric interpolation of the nodal values.
    pub fn evaluate(&self, x: P2) -> Result<f64, FemError> {
        let (t, b) = self.locate(x)?;
        let tri = self.mesh.triangles[t];
        Ok((0..3).map(|i| b[i] * self.values[tri[i] as usize]).sum())
    }

    /// Gradient on triangle `t`.
    pub fn triangle_gradient(&self, t: usize) -> P2 {
        let tri = self.mesh.triangles[t];
        let p = self.mesh.corner(t);
        let area2 = planar::cross(planar::sub(p[1], p[0]), planar::sub(p[2], p[0]));
        let mut g = [0.0; 2];
        for i in 0..3 {
            let e = planar::sub(p[(i + 2) % 3], p[(i + 1) % 3]);
            let u = self.values[tri[i] as usize];
            g[0] += u * -e[1] / area2;
            g[1] += u * e[0] / area2;
        }
        g
    }

    /// Piecewise-constant gradient at `x` (lowest triangle index on ties).
    pub fn gradient(&self, x: P2) -> Result<P2, FemError> {
        let (t, _) = self.locate(x)?;
        Ok(self.triangle_gradient(t))
    }

    pub fn lp_error(&self, gbar: f64, p: f64) -> f64 {
        let parts: Vec<f64> = self
            .mesh
            .triangles
            .par_chunks(CHUNK)
            .enumerate()
            .map(|(c, chunk)| {
                let mut s = 0.0;
                for (k, tri) in chunk.iter().enumerate() {
                    let t = c * CHUNK + k;
                    let u = tri.map(|v| self.values[v as usize]);
                    let mut q = 0.0;
                    for i in 0..3 {
                        let mid = 0.5 * (u[i] + u[(i + 1) % 3]);
                        q += (mid - gbar).abs().powf(p);
                    }
                    s += self.mesh.signed_area(t) / 3.0 * q;
                }
                s
            })
            .collect();
        parts.iter().sum::<f64>().powf(1.0 / p)
    }

    /// `‖u_h − f‖_{L²}` with a degree-5 rule on every triangle.
    pub fn l2_error_against(&self, f: impl Fn(P2) -> f64 + Sync) -> f64 {
        let rule = seven_point_rule();
        let parts: Vec<f64> = (0..self.mesh.n_triangles())
            .into_par_iter()
            .with_min_len(CHUNK)
            .map(|t| {
                let p = self.mesh.corner(t);
                let u = self.mesh.triangles[t].map(|v| self.values[v as usize]);
                let mut s = 0.0;
                for (b, w) in &rule {
                    let x = [
                        b[0] * p[0][0] + b[1] * p[1][0] + b[2] * p[2][0],
                        b[0] * p[0][1] + b[1] * p[1][1] + b[2] * p[2][1],
                    ];
                    let uh = b[0] * u[0] + b[1] * u[1] + b[2] * u[2];
                    s += w * (uh - f(x)).powi(2);
                }
                s * self.mesh.signed_area(t)
            })
            .collect();
        parts.iter().sum::<f64>().sqrt()
    }

    /// Broken `H¹` seminorm error `‖∇u_h − ∇f‖_{L²}`.
    pub fn h1_error_against(&self, grad: impl Fn(P2) -> P2 + Sync) -> f64 {
        let rule = seven_point_rule();
        let parts: Vec<f64> = (0..self.mesh.n_triangles())
            .into_par_iter()
            .with_min_len(CHUNK)
            .map(|t| {
                let p = self.mesh.corner(t);
                let gh = self.triangle_gradient(t);
                let mut s = 0.0;
                for (b, w) in &rule {
                    let x = [
                        b[0] * p[0][0] + b[1] * p[1][0] + b[2] * p[2][0],
                        b[0] * p[0][1] + b[1] * p[1][1] + b[2] * p[2][1],
                    ];
                    let g = grad(x);
                    s += w * ((gh[0] - g[0]).powi(2) + (gh[1] - g[1]).powi(2));
                }
                s * self.mesh.signed_area(t)
            })
            .collect();
        parts.iter().sum::<f64>().sqrt()
    }

    /// Largest amount by which an interior nodal value leaves the range of
    /// the boundary values (zero when the maximum principle holds).
    pub fn max_principle_violation(&self) -> f64 {
        let mask = self.mesh.boundary_mask();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (v, &b) in self.values.iter().zip(&mask) {
            if b {
                lo = lo.min(*v);
                hi = hi.max(*v);
            }
        }
        self.values
            .iter()
            .map(|&v| (lo - v).max(v - hi).max(0.0))
            .fold(0.0, f64::max)
    }

    /// CSV with columns `vertex,x,y,value`.
    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut w = std::io::BufWriter::new(w);
        writeln!(w, "vertex,x,y,value")?;
        for (i, (p, v)) in self.mesh.vertices.iter().zip(&self.values).enumerate() {
            writeln!(w, "{i},{},{},{}", p[0], p[1], v)?;
        }
        w.flush()
    }
}

/// Containing triangle and barycentric weights of `x` in a mesh.
pub(crate) fn locate_point(mesh: &TriMesh, x: P2) -> Result<(usize, [f64; 3]), FemError> {
    Locator::new(mesh)
        .locate(mesh, x)
        .ok_or(FemError::OutsideDomain { x: x[0], y: x[1] })
}

/// Vertex-to-triangle incidence used for walking point location.
#[derive(Debug)]
struct Locator {
    offsets: Vec<usize>,
    incident: Vec<u32>,
}

const BARY_TOL: f64 = 1e-12;

impl Locator {
    fn new(mesh: &TriMesh) -> Self {
        let n = mesh.n_vertices();
        let mut offsets = vec![0usize; n + 1];
        for t in &mesh.triangles {
            for &v in t {
                offsets[v as usize + 1] += 1;
            }
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut incident = vec![0u32; offsets[n]];
        for (ti, t) in mesh.triangles.iter().enumerate() {
            for &v in t {
                incident[fill[v as usize]] = ti as u32;
                fill[v as usize] += 1;
            }
        }
        Self { offsets, incident }
    }

    fn around(&self, v: u32) -> &[u32] {
        &self.incident[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    fn bary(mesh: &TriMesh, t: usize, x: P2) -> [f64; 3] {
        let p = mesh.corner(t);
        let area2 = planar::cross(planar::sub(p[1], p[0]), planar::sub(p[2], p[0]));
        std::array::from_fn(|i| {
            planar::cross(planar::sub(p[(i + 2) % 3], p[(i + 1) % 3]), planar::sub(x, p[(i + 1) % 3]))
                / area2
        })
    }

    fn inside(b: &[f64; 3]) -> bool {
        b.iter().all(|&v| v >= -BARY_TOL)
    }

    fn locate(&self, mesh: &TriMesh, x: P2) -> Option<(usize, [f64; 3])> {
        let max_steps = 4 * (mesh.n_triangles() as f64).sqrt() as usize + 64;
        let mut t = 0usize;
        for _ in 0..max_steps {
            let b = Self::bary(mesh, t, x);
            if Self::inside(&b) {
                return Some(self.lowest_containing(mesh, t, x));
            }
            let i = (0..3).min_by(|&i, &j| b[i].total_cmp(&b[j])).expect("three entries");
            let tri = mesh.triangles[t];
            let (a, c) = (tri[(i + 1) % 3], tri[(i + 2) % 3]);
            match self
                .around(a)
                .iter()
                .copied()
                .find(|&u| u as usize != t && mesh.triangles[u as usize].contains(&c))
            {
                Some(u) => t = u as usize,
                None => break,
            }
        }
        (0..mesh.n_triangles())
            .map(|t| (t, Self::bary(mesh, t, x)))
            .find(|(_, b)| Self::inside(b))
    }

    /// Among triangles sharing a vertex with `t` that contain `x`, the one
    /// with the lowest index.
    fn lowest_containing(&self, mesh: &TriMesh, t: usize, x: P2) -> (usize, [f64; 3]) {
        let b = Self::bary(mesh, t, x);
        if b.iter().all(|&v| v > BARY_TOL) {
            return (t, b);
        }
        let mut best = (t, b);
        for &v in &mesh.triangles[t] {
            for &u in self.around(v) {
                let u = u as usize;
                if u < best.0 {
                    let bu = Self::bary(mesh, u, x);
                    if Self::inside(&bu) {
                        best = (u, bu);
                    }
                }
            }
        }
        best
    }
}
