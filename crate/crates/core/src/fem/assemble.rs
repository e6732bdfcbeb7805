use rayon::prelude::*;

use crate::geometry::planar::{self, P2};

use super::CoefficientField;

/// Triangles per parallel batch; each batch is scattered in index order so
/// the assembled values do not depend on the thread count.
const WINDOW: usize = 1 << 18;

/// Square sparse matrix in compressed-row form with sorted columns.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<u32>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    /// Sparsity pattern of the P1 stiffness matrix: vertex pairs sharing a
    /// triangle, plus the diagonal.
    pub fn pattern(n: usize, triangles: &[[u32; 3]]) -> Self {
        let mut deg = vec![0usize; n + 1];
        for t in triangles {
            for &v in t {
                deg[v as usize + 1] += 2;
            }
        }
        for i in 0..n {
            deg[i + 1] += deg[i];
        }
        let mut fill = deg.clone();
        let mut raw = vec![0u32; deg[n]];
        for t in triangles {
            for i in 0..3 {
                let v = t[i] as usize;
                raw[fill[v]] = t[(i + 1) % 3];
                raw[fill[v] + 1] = t[(i + 2) % 3];
                fill[v] += 2;
            }
        }
        drop(fill);
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut cols = Vec::with_capacity(deg[n] / 2 + n);
        for i in 0..n {
            let row = &mut raw[deg[i]..deg[i + 1]];
            row.sort_unstable();
            let start = cols.len();
            let mut diag_done = false;
            for &c in row.iter() {
                if !diag_done && c as usize > i {
                    cols.push(i as u32);
                    diag_done = true;
                }
                if cols.len() > start && *cols.last().unwrap() == c {
                    continue;
                }
                cols.push(c);
            }
            if !diag_done {
                cols.push(i as u32);
            }
            row_ptr.push(cols.len());
        }
        let nnz = cols.len();
        Self {
            n,
            row_ptr,
            cols,
            vals: vec![0.0; nnz],
        }
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn position(&self, i: usize, j: u32) -> Option<usize> {
        let start = self.row_ptr[i];
        self.cols[start..self.row_ptr[i + 1]]
            .binary_search(&j)
            .ok()
            .map(|p| start + p)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j as u32).map_or(0.0, |p| self.vals[p])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.par_chunks_mut(4096).enumerate().for_each(|(c, chunk)| {
            let base = c * 4096;
            for (k, yi) in chunk.iter_mut().enumerate() {
                let i = base + k;
                let mut s = 0.0;
                for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                    s += self.vals[p] * x[self.cols[p] as usize];
                }
                *yi = s;
            }
        });
    }
}

/// Local P1 stiffness matrix with `A` evaluated at the barycenter.
pub(crate) fn local_stiffness(p: [P2; 3], coef: &CoefficientField) -> [[f64; 3]; 3] {
    let area2 = planar::cross(planar::sub(p[1], p[0]), planar::sub(p[2], p[0]));
    let grads: [P2; 3] = std::array::from_fn(|i| {
        let e = planar::sub(p[(i + 2) % 3], p[(i + 1) % 3]);
        [-e[1] / area2, e[0] / area2]
    });
    let c = [
        (p[0][0] + p[1][0] + p[2][0]) / 3.0,
        (p[0][1] + p[1][1] + p[2][1]) / 3.0,
    ];
    let a = coef.at(c);
    let half = 0.5 * area2;
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        let ag = [
            a[0][0] * grads[i][0] + a[0][1] * grads[i][1],
            a[1][0] * grads[i][0] + a[1][1] * grads[i][1],
        ];
        for j in 0..3 {
            k[i][j] = half * planar::dot2(ag, grads[j]);
        }
    }
    // exact symmetry for symmetric A
    for i in 0..3 {
        for j in 0..i {
            let s = 0.5 * (k[i][j] + k[j][i]);
            k[i][j] = s;
            k[j][i] = s;
        }
    }
    k
}

/// Assembles the stiffness matrix of `−div(A∇·)` over the given triangles,
/// which index into `vertices` (only the first `n` vertices may be used).
pub fn assemble_stiffness(
    vertices: &[P2],
    n: usize,
    triangles: &[[u32; 3]],
    coef: &CoefficientField,
) -> CsrMatrix {
    let mut m = CsrMatrix::pattern(n, triangles);
    for window in triangles.chunks(WINDOW) {
        let locals: Vec<[[f64; 3]; 3]> = window
            .par_iter()
            .map(|t| {
                let p = t.map(|v| vertices[v as usize]);
                local_stiffness(p, coef)
            })
            .collect();
        for (t, k) in window.iter().zip(&locals) {
            for i in 0..3 {
                let row = t[i] as usize;
                for j in 0..3 {
                    let pos = m.position(row, t[j]).expect("pattern covers triangle");
                    m.vals[pos] += k[i][j];
                }
            }
        }
    }
    m
}
