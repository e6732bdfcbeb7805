use rayon::prelude::*;
use serde::Serialize;

use super::assemble::{assemble_stiffness, CsrMatrix};
use super::{CoefficientField, FemError, TriMesh};

/// Fixed chunk for parallel reductions; the partial sums are combined in
/// chunk order so results are reproducible.
const CHUNK: usize = 1 << 14;
const SMOOTHING_STEPS: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct SolverConfig {
    /// Target relative residual `‖b − Ax‖ / ‖b‖`.
    pub linear_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            linear_tol: 1e-10,
            max_iter: 5000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolverStats {
    pub iterations: usize,
    /// True relative residual of the returned solution.
    pub residual: f64,
    pub multigrid: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let parts: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| u * v).sum::<f64>())
        .collect();
    parts.iter().sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.par_chunks_mut(CHUNK)
        .zip(x.par_chunks(CHUNK))
        .for_each(|(y, x)| y.iter_mut().zip(x).for_each(|(y, x)| *y += alpha * x));
}

/// Replaces boundary rows by identity rows and zeroes boundary columns in
/// interior rows, returning the removed interior-to-boundary couplings.
fn eliminate(a: &mut CsrMatrix, mask: &[bool]) -> Vec<(u32, u32, f64)> {
    let mut coupling = Vec::new();
    for i in 0..a.n {
        for p in a.row_ptr[i]..a.row_ptr[i + 1] {
            let j = a.cols[p] as usize;
            if mask[i] {
                a.vals[p] = if i == j { 1.0 } else { 0.0 };
            } else if mask[j] {
                if a.vals[p] != 0.0 {
                    coupling.push((i as u32, j as u32, a.vals[p]));
                }
                a.vals[p] = 0.0;
            }
        }
    }
    coupling
}

fn gs_forward(a: &CsrMatrix, inv_diag: &[f64], b: &[f64], x: &mut [f64]) {
    for i in 0..a.n {
        let mut s = b[i];
        for p in a.row_ptr[i]..a.row_ptr[i + 1] {
            let j = a.cols[p] as usize;
            if j != i {
                s -= a.vals[p] * x[j];
            }
        }
        x[i] = s * inv_diag[i];
    }
}

fn gs_backward(a: &CsrMatrix, inv_diag: &[f64], b: &[f64], x: &mut [f64]) {
    for i in (0..a.n).rev() {
        let mut s = b[i];
        for p in a.row_ptr[i]..a.row_ptr[i + 1] {
            let j = a.cols[p] as usize;
            if j != i {
                s -= a.vals[p] * x[j];
            }
        }
        x[i] = s * inv_diag[i];
    }
}

struct DenseCholesky {
    n: usize,
    l: Vec<f64>,
}

impl DenseCholesky {
    fn new(a: &CsrMatrix) -> Result<Self, FemError> {
        let n = a.n;
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                l[i * n + j as usize] = v;
            }
        }
        for j in 0..n {
            let mut d = l[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > 0.0) {
                return Err(FemError::InvalidMesh(
                    "coarse operator is not positive definite".into(),
                ));
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in j + 1..n {
                let mut s = l[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
            for i in 0..j {
                l[i * n + j] = 0.0;
            }
        }
        Ok(Self { n, l })
    }

    fn solve(&self, b: &[f64], x: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[i * n + k] * x[k];
            }
            x[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * x[k];
            }
            x[i] = s / self.l[i * n + i];
        }
    }
}

struct MgLevel {
    a: CsrMatrix,
    inv_diag: Vec<f64>,
    /// Parent edges of the vertices added when refining to the next level.
    parents: Vec<[u32; 2]>,
}

/// Geometric multigrid V-cycle on the nested red-refinement hierarchy, with
/// rediscretized coarse operators and symmetric Gauss–Seidel smoothing.
struct Multigrid {
    coarse: DenseCholesky,
    /// Levels `1..` up to and excluding the finest.
    levels: Vec<MgLevel>,
    /// Parent edges for the step from the last coarse level to the finest.
    fine_parents: Vec<[u32; 2]>,
    level0_parents: Vec<[u32; 2]>,
}

enum Preconditioner {
    Multigrid(Multigrid),
    SymmetricGaussSeidel,
}

fn prolong_add(parents: &[[u32; 2]], coarse: &[f64], fine: &mut [f64], mask: &[bool]) {
    let nc = coarse.len();
    for i in 0..nc {
        fine[i] += coarse[i];
    }
    for (k, &[a, b]) in parents.iter().enumerate() {
        let v = nc + k;
        if !mask[v] {
            fine[v] += 0.5 * (coarse[a as usize] + coarse[b as usize]);
        }
    }
}

fn restrict(parents: &[[u32; 2]], fine: &[f64], nc: usize, mask: &[bool]) -> Vec<f64> {
    let mut coarse = fine[..nc].to_vec();
    for (k, &[a, b]) in parents.iter().enumerate() {
        let v = nc + k;
        if mask[v] {
            continue;
        }
        coarse[a as usize] += 0.5 * fine[v];
        coarse[b as usize] += 0.5 * fine[v];
    }
    for i in 0..nc {
        if mask[i] {
            coarse[i] = 0.0;
        }
    }
    coarse
}

impl Multigrid {
    fn build(mesh: &TriMesh, coef: &CoefficientField, mask: &[bool]) -> Result<Option<Self>, FemError> {
        let Some(h) = mesh.hierarchy() else {
            return Ok(None);
        };
        if h.levels.is_empty() {
            return Ok(None);
        }
        let mut mats: Vec<CsrMatrix> = h
            .levels
            .par_iter()
            .map(|lvl| assemble_stiffness(&mesh.vertices, lvl.n_vertices, &lvl.triangles, coef))
            .collect();
        for (m, lvl) in mats.iter_mut().zip(&h.levels) {
            eliminate(m, &mask[..lvl.n_vertices]);
        }
        let mut it = mats.into_iter();
        let coarse = DenseCholesky::new(&it.next().expect("at least one level"))?;
        let levels: Vec<MgLevel> = it
            .enumerate()
            .map(|(i, a)| {
                let inv_diag = a.diagonal().iter().map(|d| 1.0 / d).collect();
                MgLevel {
                    a,
                    inv_diag,
                    parents: h.parents[i + 1].clone(),
                }
            })
            .collect();
        let mut parents = h.parents.clone();
        let fine_parents = parents.pop().expect("refined at least once");
        let level0_parents = h.parents[0].clone();
        let mut mg = Self {
            coarse,
            levels,
            fine_parents,
            level0_parents,
        };
        // parents of each kept level describe the step to the next level
        if let Some(last) = mg.levels.last_mut() {
            last.parents = mg.fine_parents.clone();
        }
        Ok(Some(mg))
    }

    /// Approximately solves `A_l e = r` on level `l` (0 = coarsest).
    fn cycle(&self, l: usize, r: &[f64], mask: &[bool]) -> Vec<f64> {
        if l == 0 {
            let mut e = vec![0.0; r.len()];
            self.coarse.solve(r, &mut e);
            return e;
        }
        let lvl = &self.levels[l - 1];
        let mut x = vec![0.0; r.len()];
        for _ in 0..SMOOTHING_STEPS {
            gs_forward(&lvl.a, &lvl.inv_diag, r, &mut x);
        }
        let mut res = vec![0.0; r.len()];
        lvl.a.matvec(&x, &mut res);
        res.iter_mut().zip(r).for_each(|(q, b)| *q = b - *q);
        let (nc, parents) = self.step_below(l);
        let rc = restrict(parents, &res, nc, mask);
        let ec = self.cycle(l - 1, &rc, mask);
        prolong_add(parents, &ec, &mut x, mask);
        for _ in 0..SMOOTHING_STEPS {
            gs_backward(&lvl.a, &lvl.inv_diag, r, &mut x);
        }
        x
    }

    /// Size of level `l − 1` and the parent list refining it to level `l`.
    fn step_below(&self, l: usize) -> (usize, &[[u32; 2]]) {
        if l == 1 {
            (self.coarse.n, &self.level0_parents)
        } else {
            let below = &self.levels[l - 2];
            (below.a.n, &below.parents)
        }
    }

    fn apply(&self, fine: &FineLevel, r: &[f64]) -> Vec<f64> {
        let mask = &fine.mask;
        let mut x = vec![0.0; r.len()];
        for _ in 0..SMOOTHING_STEPS {
            gs_forward(&fine.a, &fine.inv_diag, r, &mut x);
        }
        let mut res = vec![0.0; r.len()];
        fine.a.matvec(&x, &mut res);
        res.iter_mut().zip(r).for_each(|(q, b)| *q = b - *q);
        let l = self.levels.len();
        let (nc, parents) = if l == 0 {
            (self.coarse.n, &self.level0_parents[..])
        } else {
            (self.levels[l - 1].a.n, &self.fine_parents[..])
        };
        let rc = restrict(parents, &res, nc, mask);
        let ec = self.cycle(l, &rc, mask);
        prolong_add(parents, &ec, &mut x, mask);
        for _ in 0..SMOOTHING_STEPS {
            gs_backward(&fine.a, &fine.inv_diag, r, &mut x);
        }
        x
    }
}

struct FineLevel {
    a: CsrMatrix,
    inv_diag: Vec<f64>,
    mask: Vec<bool>,
}

/// Stiffness system of a mesh with all boundary vertices constrained.
/// Assembled once and reusable for any boundary data or interior load.
pub struct DirichletSolver {
    fine: FineLevel,
    /// Removed entries `(interior i, boundary j, K_ij)`.
    coupling: Vec<(u32, u32, f64)>,
    /// Original rows of boundary vertices: `(boundary i, interior j, K_ij)`.
    boundary_rows: Vec<(u32, u32, f64)>,
    precond: Preconditioner,
    config: SolverConfig,
}

impl DirichletSolver {
    pub fn new(mesh: &TriMesh, coef: &CoefficientField, config: SolverConfig) -> Result<Self, FemError> {
        if !(config.linear_tol > 0.0) || config.max_iter == 0 {
            return Err(FemError::InvalidParameter(
                "solver tolerance and iteration cap must be positive".into(),
            ));
        }
        let mask = mesh.boundary_mask();
        let mut a = assemble_stiffness(&mesh.vertices, mesh.n_vertices(), &mesh.triangles, coef);
        let mut boundary_rows = Vec::new();
        for i in 0..a.n {
            if mask[i] {
                let (cols, vals) = a.row(i);
                for (&j, &v) in cols.iter().zip(vals) {
                    if !mask[j as usize] && v != 0.0 {
                        boundary_rows.push((i as u32, j, v));
                    }
                }
            }
        }
        let coupling = eliminate(&mut a, &mask);
        let inv_diag = a.diagonal().iter().map(|d| 1.0 / d).collect();
        let precond = match Multigrid::build(mesh, coef, &mask)? {
            Some(mg) => Preconditioner::Multigrid(mg),
            None => Preconditioner::SymmetricGaussSeidel,
        };
        Ok(Self {
            fine: FineLevel { a, inv_diag, mask },
            coupling,
            boundary_rows,
            precond,
            config,
        })
    }

    pub fn n(&self) -> usize {
        self.fine.a.n
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.fine.mask
    }

    fn precondition(&self, r: &[f64]) -> Vec<f64> {
        match &self.precond {
            Preconditioner::Multigrid(mg) => mg.apply(&self.fine, r),
            Preconditioner::SymmetricGaussSeidel => {
                let mut z = vec![0.0; r.len()];
                gs_forward(&self.fine.a, &self.fine.inv_diag, r, &mut z);
                gs_backward(&self.fine.a, &self.fine.inv_diag, r, &mut z);
                z
            }
        }
    }

    /// Discrete harmonic extension of the boundary values in `data` (entries
    /// at interior vertices are ignored).
    pub fn solve(&self, data: &[f64]) -> Result<(Vec<f64>, SolverStats), FemError> {
        let mask = &self.fine.mask;
        let mut b = vec![0.0; self.n()];
        let mut bsum = 0.0;
        let mut bcount = 0usize;
        for i in 0..self.n() {
            if mask[i] {
                b[i] = data[i];
                bsum += data[i];
                bcount += 1;
            }
        }
        for &(i, j, v) in &self.coupling {
            b[i as usize] -= v * data[j as usize];
        }
        let mean = if bcount > 0 { bsum / bcount as f64 } else { 0.0 };
        let x0: Vec<f64> = (0..self.n())
            .map(|i| if mask[i] { data[i] } else { mean })
            .collect();
        self.pcg(&b, x0)
    }

    /// Solves with zero boundary values and the given interior load.
    pub fn solve_load(&self, load: &[f64]) -> Result<(Vec<f64>, SolverStats), FemError> {
        let mask = &self.fine.mask;
        let b: Vec<f64> = load
            .iter()
            .zip(mask)
            .map(|(&v, &m)| if m { 0.0 } else { v })
            .collect();
        self.pcg(&b, vec![0.0; self.n()])
    }

    /// `(K u)_i` on boundary rows of the unconstrained stiffness matrix,
    /// restricted to interior columns.
    pub fn boundary_coupling(&self, u: &[f64]) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = Vec::new();
        for &(i, j, v) in &self.boundary_rows {
            match out.last_mut() {
                Some((k, s)) if *k == i as usize => *s += v * u[j as usize],
                _ => out.push((i as usize, v * u[j as usize])),
            }
        }
        out
    }

    fn pcg(&self, b: &[f64], mut x: Vec<f64>) -> Result<(Vec<f64>, SolverStats), FemError> {
        let a = &self.fine.a;
        let n = a.n;
        let multigrid = matches!(self.precond, Preconditioner::Multigrid(_));
        let bnorm = dot(b, b).sqrt();
        if bnorm == 0.0 {
            return Ok((
                vec![0.0; n],
                SolverStats {
                    iterations: 0,
                    residual: 0.0,
                    multigrid,
                },
            ));
        }
        let tol = self.config.linear_tol;
        let mut r = vec![0.0; n];
        let mut q = vec![0.0; n];
        let residual = |x: &[f64], r: &mut [f64]| {
            a.matvec(x, r);
            r.par_chunks_mut(CHUNK)
                .zip(b.par_chunks(CHUNK))
                .for_each(|(r, b)| r.iter_mut().zip(b).for_each(|(r, b)| *r = b - *r));
        };
        residual(&x, &mut r);
        let mut rel = dot(&r, &r).sqrt() / bnorm;
        let mut iterations = 0;
        'restart: while rel > tol {
            let mut z = self.precondition(&r);
            let mut p = z.clone();
            let mut rz = dot(&r, &z);
            loop {
                if iterations >= self.config.max_iter {
                    return Err(FemError::NoConvergence {
                        iterations,
                        residual: rel,
                    });
                }
                iterations += 1;
                a.matvec(&p, &mut q);
                let pq = dot(&p, &q);
                if !(pq > 0.0) {
                    return Err(FemError::NoConvergence {
                        iterations,
                        residual: rel,
                    });
                }
                let alpha = rz / pq;
                axpy(alpha, &p, &mut x);
                axpy(-alpha, &q, &mut r);
                rel = dot(&r, &r).sqrt() / bnorm;
                if rel <= tol {
                    // confirm with the true residual before accepting
                    residual(&x, &mut r);
                    rel = dot(&r, &r).sqrt() / bnorm;
                    continue 'restart;
                }
                z = self.precondition(&r);
                let rz_new = dot(&r, &z);
                let beta = rz_new / rz;
                rz = rz_new;
                p.par_chunks_mut(CHUNK)
                    .zip(z.par_chunks(CHUNK))
                    .for_each(|(p, z)| p.iter_mut().zip(z).for_each(|(p, z)| *p = z + beta * *p));
            }
        }
        Ok((
            x,
            SolverStats {
                iterations,
                residual: rel,
                multigrid,
            },
        ))
    }
}

/// Solves the Dirichlet problem on `mesh` with boundary values taken from
/// `data` (one entry per vertex; interior entries are ignored).
pub fn solve_nodal(
    mesh: &TriMesh,
    coef: &CoefficientField,
    data: &[f64],
    config: SolverConfig,
) -> Result<(Vec<f64>, SolverStats), FemError> {
    if data.len() != mesh.n_vertices() {
        return Err(FemError::InvalidParameter(format!(
            "expected {} nodal values, got {}",
            mesh.n_vertices(),
            data.len()
        )));
    }
    DirichletSolver::new(mesh, coef, config)?.solve(data)
}
