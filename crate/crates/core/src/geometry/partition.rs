use serde::Serialize;

use super::planar::{self, P2};
use super::{Face, FaceShape, GeometryError, GEOM_TOL};

/// Tolerance on the lattice when deciding whether a cube fits in the
/// projected face.
const FIT_TOL: f64 = 1e-10;

/// A convex piece of a face, stored both in ambient coordinates and after
/// projection along the eliminated axis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FacePiece {
    /// Ambient vertices (segment endpoints for `d = 2`, CCW polygon in the
    /// projected coordinates for `d = 3`).
    pub vertices: Vec<Vec<f64>>,
    /// Same vertices with the eliminated coordinate dropped.
    pub projected: Vec<Vec<f64>>,
    /// `(d−1)`-dimensional measure on the face.
    pub measure: f64,
}

impl FacePiece {
    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut d: f64 = 0.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d = d.max(super::dist(&v[i], &v[j]));
            }
        }
        d
    }
}

/// Preimage of one lattice cube under the projection.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionCell {
    pub lattice_index: Vec<i64>,
    /// Lower corner of the projected cube.
    pub lower: Vec<f64>,
    /// Upper corner of the projected cube.
    pub upper: Vec<f64>,
    pub piece: FacePiece,
}

/// Decomposition of a face into lattice cells plus a leftover set near the
/// face's relative boundary.
#[derive(Clone, Debug, Serialize)]
pub struct FacePartition {
    pub face_index: usize,
    pub normal: Vec<f64>,
    pub offset: f64,
    /// Eliminated coordinate (0-based).
    pub axis: usize,
    pub cell_size: f64,
    pub cells: Vec<PartitionCell>,
    pub leftover: Vec<FacePiece>,
    /// Width factor: the leftover lies within distance `c0·ρ` of `∂Π`.
    pub c0: f64,
    pub face_measure: f64,
    #[serde(skip)]
    face: Face,
}

impl FacePartition {
    pub fn face(&self) -> &Face {
        &self.face
    }

    pub fn cells_measure(&self) -> f64 {
        self.cells.iter().map(|c| c.piece.measure).sum()
    }

    pub fn leftover_measure(&self) -> f64 {
        self.leftover.iter().map(|p| p.measure).sum()
    }

    /// Exact per-cell measure `ρ^{d−1}/|ν_k|`.
    pub fn expected_cell_measure(&self) -> f64 {
        let d = self.normal.len();
        self.cell_size.powi(d as i32 - 1) / self.normal[self.axis].abs()
    }

    /// Bound `√(d−1)·ρ/|ν_k|` on every cell diameter.
    pub fn cell_diameter_bound(&self) -> f64 {
        let d = self.normal.len();
        ((d - 1) as f64).sqrt() * self.cell_size / self.normal[self.axis].abs()
    }

    /// Checks that every leftover piece lies inside the strip of width
    /// `c0·ρ` along the face's relative boundary.
    pub fn leftover_in_strip(&self) -> bool {
        let width = self.c0 * self.cell_size;
        match &self.face.shape {
            FaceShape::Segment { start, end } => {
                let dir = planar::sub(*end, *start);
                let len = planar::len2(dir);
                self.leftover.iter().all(|p| {
                    let ts: Vec<f64> = p
                        .vertices
                        .iter()
                        .map(|v| planar::dot2(planar::sub([v[0], v[1]], *start), dir) / len)
                        .collect();
                    let lo = ts.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = ts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    // the piece must avoid the open middle (width, len − width)
                    hi <= width + GEOM_TOL || lo >= len - width - GEOM_TOL
                })
            }
            FaceShape::Polygon { local, frame, .. } => self.leftover.iter().all(|p| {
                let pts: Vec<P2> = p.vertices.iter().map(|v| frame.to_local(v)).collect();
                let core = planar::inner_parallel(local, width, &pts);
                planar::signed_area(&core).abs() <= 1e-12
            }),
            FaceShape::Implicit => false,
        }
    }
}

/// Partitions `face` into preimages of the cubes of `ρ·Z^{d−1}` (in the
/// coordinates other than `axis`) that fit entirely inside the projected
/// face. What remains is returned as explicit convex pieces.
pub fn lattice_partition(
    face: &Face,
    axis: usize,
    rho: f64,
) -> Result<FacePartition, GeometryError> {
    let d = face.dim();
    if axis >= d {
        return Err(GeometryError::InvalidParameter(format!(
            "axis {axis} out of range for dimension {d}"
        )));
    }
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(GeometryError::InvalidParameter(format!(
            "cell size must be positive, got {rho}"
        )));
    }
    let nk = face.normal[axis];
    if nk.abs() <= GEOM_TOL {
        return Err(GeometryError::ZeroNormalComponent { axis });
    }
    let face_measure = face
        .measure()
        .ok_or(GeometryError::UnsupportedDimension(d))?;
    let lift = Lift {
        normal: &face.normal,
        offset: face.offset,
        axis,
    };
    let (cells, leftover) = match &face.shape {
        FaceShape::Segment { start, end } => partition_segment(&lift, *start, *end, rho),
        FaceShape::Polygon { vertices, .. } => partition_polygon(&lift, vertices, rho),
        FaceShape::Implicit => return Err(GeometryError::UnsupportedDimension(d)),
    };
    Ok(FacePartition {
        face_index: face.index,
        normal: face.normal.clone(),
        offset: face.offset,
        axis,
        cell_size: rho,
        cells,
        leftover,
        c0: 2.0 * ((d - 1) as f64).sqrt() / nk.abs(),
        face_measure,
        face: face.clone(),
    })
}

/// Recovers the eliminated coordinate from the face equation.
struct Lift<'a> {
    normal: &'a [f64],
    offset: f64,
    axis: usize,
}

impl Lift<'_> {
    fn point(&self, projected: &[f64]) -> Vec<f64> {
        let d = self.normal.len();
        let mut out = vec![0.0; d];
        let mut rest = self.offset;
        let mut it = projected.iter();
        for (i, slot) in out.iter_mut().enumerate() {
            if i != self.axis {
                *slot = *it.next().expect("projected point has d−1 coordinates");
                rest -= self.normal[i] * *slot;
            }
        }
        out[self.axis] = rest / self.normal[self.axis];
        let _ = d;
        out
    }

    fn project(&self, p: &[f64]) -> Vec<f64> {
        p.iter()
            .enumerate()
            .filter(|(i, _)| *i != self.axis)
            .map(|(_, v)| *v)
            .collect()
    }

    fn jacobian(&self) -> f64 {
        1.0 / self.normal[self.axis].abs()
    }
}

fn lattice_range(lo: f64, hi: f64, rho: f64) -> (i64, i64) {
    // cubes [iρ, (i+1)ρ] inside [lo, hi]
    let first = ((lo - FIT_TOL) / rho).ceil() as i64;
    let last = ((hi + FIT_TOL) / rho).floor() as i64 - 1;
    (first, last)
}

fn partition_segment(
    lift: &Lift,
    start: [f64; 2],
    end: [f64; 2],
    rho: f64,
) -> (Vec<PartitionCell>, Vec<FacePiece>) {
    let j = 1 - lift.axis;
    let (lo, hi) = if start[j] <= end[j] {
        (start[j], end[j])
    } else {
        (end[j], start[j])
    };
    let piece = |a: f64, b: f64| FacePiece {
        vertices: vec![lift.point(&[a]), lift.point(&[b])],
        projected: vec![vec![a], vec![b]],
        measure: (b - a) * lift.jacobian(),
    };
    let (first, last) = lattice_range(lo, hi, rho);
    let mut cells = Vec::new();
    for i in first..=last {
        let a = i as f64 * rho;
        let b = (i + 1) as f64 * rho;
        cells.push(PartitionCell {
            lattice_index: vec![i],
            lower: vec![a],
            upper: vec![b],
            piece: piece(a, b),
        });
    }
    let mut leftover = Vec::new();
    if cells.is_empty() {
        leftover.push(piece(lo, hi));
    } else {
        let a = first as f64 * rho;
        let b = (last + 1) as f64 * rho;
        if a - lo > FIT_TOL {
            leftover.push(piece(lo, a));
        }
        if hi - b > FIT_TOL {
            leftover.push(piece(b, hi));
        }
    }
    (cells, leftover)
}

fn partition_polygon(
    lift: &Lift,
    vertices: &[[f64; 3]],
    rho: f64,
) -> (Vec<PartitionCell>, Vec<FacePiece>) {
    let mut q: Vec<P2> = vertices
        .iter()
        .map(|v| {
            let p = lift.project(v);
            [p[0], p[1]]
        })
        .collect();
    if planar::signed_area(&q) < 0.0 {
        q.reverse();
    }
    let (mut min, mut max) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &q {
        for t in 0..2 {
            min[t] = min[t].min(p[t]);
            max[t] = max[t].max(p[t]);
        }
    }
    let i0 = (min[0] / rho).floor() as i64;
    let i1 = (max[0] / rho).ceil() as i64;
    let j0 = (min[1] / rho).floor() as i64;
    let j1 = (max[1] / rho).ceil() as i64;
    let jac = lift.jacobian();
    let make_piece = |poly: &[P2]| FacePiece {
        vertices: poly.iter().map(|p| lift.point(p)).collect(),
        projected: poly.iter().map(|p| p.to_vec()).collect(),
        measure: planar::signed_area(poly) * jac,
    };

    let mut cells = Vec::new();
    let mut leftover = Vec::new();
    for a in i0..i1 {
        for b in j0..j1 {
            let lo = [a as f64 * rho, b as f64 * rho];
            let hi = [(a + 1) as f64 * rho, (b + 1) as f64 * rho];
            let square = [lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]];
            if square
                .iter()
                .all(|&c| planar::contains_convex(&q, c, FIT_TOL))
            {
                cells.push(PartitionCell {
                    lattice_index: vec![a, b],
                    lower: lo.to_vec(),
                    upper: hi.to_vec(),
                    piece: make_piece(&square),
                });
                continue;
            }
            let part = planar::clip_convex(&square, &q);
            if part.len() >= 3 && planar::signed_area(&part) > 1e-15 {
                leftover.push(make_piece(&part));
            }
        }
    }
    (cells, leftover)
}

/// True iff `y` (on the face's hyperplane) lies within `rho` of the face's
/// relative boundary. Points on the hyperplane but outside the face count as
/// inside the strip.
pub fn face_strip_membership(face: &Face, rho: f64, y: &[f64]) -> Result<bool, GeometryError> {
    if y.len() != face.dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: face.dim(),
            found: y.len(),
        });
    }
    if !(rho > 0.0) {
        return Err(GeometryError::InvalidParameter(format!(
            "strip width must be positive, got {rho}"
        )));
    }
    let r = face.plane_residual(y);
    if r > 1e-9 {
        return Err(GeometryError::OffHyperplane(r));
    }
    let depth = match &face.shape {
        FaceShape::Segment { start, end } => {
            let dir = planar::sub(*end, *start);
            let len = planar::len2(dir);
            let t = planar::dot2(planar::sub([y[0], y[1]], *start), dir) / len;
            t.min(len - t)
        }
        FaceShape::Polygon { local, frame, .. } => planar::interior_distance(local, frame.to_local(y)),
        FaceShape::Implicit => return Err(GeometryError::UnsupportedDimension(face.dim())),
    };
    Ok(depth <= rho)
}
