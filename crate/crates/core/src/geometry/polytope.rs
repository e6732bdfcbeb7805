use std::f64::consts::PI;

use log::warn;
use microlp::{ComparisonOp, OptimizationDirection, Problem};
use serde::{Deserialize, Serialize};

use super::planar::{self, P2};
use super::{dist, dot, norm, point_segment_distance, GeometryError, GEOM_TOL};

const NORMAL_TOL: f64 = 1e-12;
const RENORMALIZE_WARN: f64 = 1e-8;

/// Open half-space `{x : normal · x > offset}` with a unit normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    normal: Vec<f64>,
    offset: f64,
}

impl HalfSpace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self, GeometryError> {
        let n = norm(&normal);
        if !n.is_finite() || !offset.is_finite() || (n - 1.0).abs() > NORMAL_TOL {
            return Err(GeometryError::BadNormal { norm: n });
        }
        Ok(Self { normal, offset })
    }

    /// Rescales `normal` (and `offset`) to unit length. Returns the half-space
    /// and `|‖normal‖ - 1|` before rescaling.
    pub fn normalized(normal: Vec<f64>, offset: f64) -> Result<(Self, f64), GeometryError> {
        let n = norm(&normal);
        if !n.is_finite() || n == 0.0 || !offset.is_finite() {
            return Err(GeometryError::BadNormal { norm: n });
        }
        let unit = normal.iter().map(|v| v / n).collect();
        Ok((
            Self {
                normal: unit,
                offset: offset / n,
            },
            (n - 1.0).abs(),
        ))
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// `ν · x - c`; the distance to the bounding hyperplane for interior `x`.
    pub fn slack(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }
}

/// Orthonormal frame of a 2-plane in `R^3`, with `e1 × e2` equal to the
/// face's inward normal.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneFrame {
    pub origin: [f64; 3],
    pub e1: [f64; 3],
    pub e2: [f64; 3],
}

impl PlaneFrame {
    fn from_normal(normal: &[f64], offset: f64) -> Self {
        let n = [normal[0], normal[1], normal[2]];
        let origin = [n[0] * offset, n[1] * offset, n[2] * offset];
        // least-aligned coordinate axis gives a well-conditioned first tangent
        let mut axis = 0;
        for i in 1..3 {
            if n[i].abs() < n[axis].abs() {
                axis = i;
            }
        }
        let mut a = [0.0; 3];
        a[axis] = 1.0;
        let proj = dot(&a, &n);
        let mut e1 = [a[0] - proj * n[0], a[1] - proj * n[1], a[2] - proj * n[2]];
        let l = norm(&e1);
        e1.iter_mut().for_each(|v| *v /= l);
        let e2 = cross3(n, e1);
        Self { origin, e1, e2 }
    }

    pub fn to_local(&self, p: &[f64]) -> P2 {
        let d = [
            p[0] - self.origin[0],
            p[1] - self.origin[1],
            p[2] - self.origin[2],
        ];
        [dot(&d, &self.e1), dot(&d, &self.e2)]
    }

    pub fn to_global(&self, q: P2) -> [f64; 3] {
        let mut out = self.origin;
        for i in 0..3 {
            out[i] += q[0] * self.e1[i] + q[1] * self.e2[i];
        }
        out
    }
}

pub(crate) fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Vertex description of a face where one is available.
#[derive(Clone, Debug, PartialEq)]
pub enum FaceShape {
    /// `d = 2`: oriented so that the polygon boundary runs counterclockwise.
    Segment { start: [f64; 2], end: [f64; 2] },
    /// `d = 3`: convex polygon, counterclockwise in `frame`.
    Polygon {
        vertices: Vec<[f64; 3]>,
        local: Vec<P2>,
        frame: PlaneFrame,
    },
    /// General `d`: only the active constraint is known.
    Implicit,
}

/// A (d−1)-dimensional face: the part of `{ν·x = c}` where every other
/// constraint holds strictly.
#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub index: usize,
    pub normal: Vec<f64>,
    pub offset: f64,
    pub shape: FaceShape,
}

impl Face {
    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// `(d−1)`-dimensional measure, when a vertex description exists.
    pub fn measure(&self) -> Option<f64> {
        match &self.shape {
            FaceShape::Segment { start, end } => Some(planar::len2(planar::sub(*end, *start))),
            FaceShape::Polygon { local, .. } => Some(planar::signed_area(local)),
            FaceShape::Implicit => None,
        }
    }

    pub fn vertices(&self) -> Vec<Vec<f64>> {
        match &self.shape {
            FaceShape::Segment { start, end } => vec![start.to_vec(), end.to_vec()],
            FaceShape::Polygon { vertices, .. } => vertices.iter().map(|v| v.to_vec()).collect(),
            FaceShape::Implicit => Vec::new(),
        }
    }

    /// Closed edges bounding the face (`d = 3`), or the endpoints as
    /// degenerate edges (`d = 2`).
    pub fn edges(&self) -> Vec<(Vec<f64>, Vec<f64>)> {
        match &self.shape {
            FaceShape::Segment { start, end } => vec![
                (start.to_vec(), start.to_vec()),
                (end.to_vec(), end.to_vec()),
            ],
            FaceShape::Polygon { vertices, .. } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| (vertices[i].to_vec(), vertices[(i + 1) % n].to_vec()))
                    .collect()
            }
            FaceShape::Implicit => Vec::new(),
        }
    }

    pub fn diameter(&self) -> Option<f64> {
        let v = self.vertices();
        if v.is_empty() {
            return None;
        }
        let mut d: f64 = 0.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d = d.max(dist(&v[i], &v[j]));
            }
        }
        Some(d)
    }

    pub fn centroid(&self) -> Option<Vec<f64>> {
        match &self.shape {
            FaceShape::Segment { start, end } => Some(vec![
                0.5 * (start[0] + end[0]),
                0.5 * (start[1] + end[1]),
            ]),
            FaceShape::Polygon { local, frame, .. } => {
                Some(frame.to_global(planar::centroid(local)).to_vec())
            }
            FaceShape::Implicit => None,
        }
    }

    /// `|ν·y − c|`.
    pub fn plane_residual(&self, y: &[f64]) -> f64 {
        (dot(&self.normal, y) - self.offset).abs()
    }
}

/// Maximal interior angle between adjacent faces.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngleReport {
    /// Interior dihedral angle `π − arccos(ν_i·ν_j)` of the worst pair.
    pub omega_max: f64,
    /// Solves `π / (1 + α*) = omega_max`.
    pub alpha_star: f64,
    /// Half-space indices of the worst adjacent pair.
    pub pair: (usize, usize),
}

/// JSON form `{"dim": d, "halfspaces": [{"normal": [...], "offset": c}, ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolytopeDoc {
    pub dim: usize,
    pub halfspaces: Vec<HalfSpaceDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HalfSpaceDoc {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// Bounded convex polytope with nonempty interior.
#[derive(Clone, Debug)]
pub struct ConvexPolytope {
    dim: usize,
    halfspaces: Vec<HalfSpace>,
    interior_point: Vec<f64>,
    inradius: f64,
    bbox: Vec<(f64, f64)>,
    faces: Vec<Face>,
    degenerate: Vec<usize>,
}

/// Validates a half-space list and builds the polytope.
pub fn build_polytope(halfspaces: Vec<HalfSpace>) -> Result<ConvexPolytope, GeometryError> {
    ConvexPolytope::new(halfspaces)
}

impl ConvexPolytope {
    pub fn new(halfspaces: Vec<HalfSpace>) -> Result<Self, GeometryError> {
        let first = halfspaces.first().ok_or(GeometryError::NoHalfSpaces)?;
        let dim = first.dim();
        if dim < 2 {
            return Err(GeometryError::DimensionTooSmall(dim));
        }
        for h in &halfspaces {
            if h.dim() != dim {
                return Err(GeometryError::DimensionMismatch {
                    expected: dim,
                    found: h.dim(),
                });
            }
            HalfSpace::new(h.normal.clone(), h.offset)?;
        }
        for i in 0..halfspaces.len() {
            for j in i + 1..halfspaces.len() {
                let (a, b) = (&halfspaces[i], &halfspaces[j]);
                let same_normal = a
                    .normal
                    .iter()
                    .zip(&b.normal)
                    .all(|(x, y)| (x - y).abs() <= GEOM_TOL);
                if same_normal && (a.offset - b.offset).abs() <= GEOM_TOL {
                    return Err(GeometryError::DuplicateHalfSpace(i, j));
                }
            }
        }

        let (interior_point, inradius) = chebyshev_center(dim, &halfspaces)?;
        if inradius <= GEOM_TOL {
            return Err(GeometryError::EmptyInterior);
        }
        let bbox = bounding_box(dim, &halfspaces)?;

        let mut poly = Self {
            dim,
            halfspaces,
            interior_point,
            inradius,
            bbox,
            faces: Vec::new(),
            degenerate: Vec::new(),
        };
        poly.compute_faces()?;
        Ok(poly)
    }

    /// Convex polygon from counterclockwise vertices.
    pub fn from_vertices_2d(vertices: &[[f64; 2]]) -> Result<Self, GeometryError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeometryError::InvalidParameter(
                "a polygon needs at least three vertices".into(),
            ));
        }
        let mut hs = Vec::with_capacity(n);
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let e = planar::sub(b, a);
            let l = planar::len2(e);
            if l <= GEOM_TOL {
                return Err(GeometryError::InvalidParameter(format!(
                    "vertices {i} and {} coincide",
                    (i + 1) % n
                )));
            }
            let nu = [-e[1] / l, e[0] / l];
            hs.push(HalfSpace {
                normal: nu.to_vec(),
                offset: planar::dot2(nu, a),
            });
        }
        Self::new(hs)
    }

    /// Axis-aligned box `∏ [lo_i, hi_i]`.
    pub fn axis_box(lo: &[f64], hi: &[f64]) -> Result<Self, GeometryError> {
        let d = lo.len();
        let mut hs = Vec::with_capacity(2 * d);
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            hs.push(HalfSpace::new(e.clone(), lo[i])?);
            e[i] = -1.0;
            hs.push(HalfSpace::new(e, -hi[i])?);
        }
        Self::new(hs)
    }

    pub fn unit_square() -> Self {
        Self::axis_box(&[0.0, 0.0], &[1.0, 1.0]).expect("unit square")
    }

    pub fn unit_cube() -> Self {
        Self::axis_box(&[0.0; 3], &[1.0; 3]).expect("unit cube")
    }

    /// Regular `n`-gon with vertices `center + radius·(cos(2πk/n), sin(2πk/n))`.
    pub fn regular_polygon(n: usize, radius: f64, center: [f64; 2]) -> Result<Self, GeometryError> {
        let verts: Vec<[f64; 2]> = (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
            })
            .collect();
        Self::from_vertices_2d(&verts)
    }

    /// Rotates every normal by `angle` and keeps the offsets, i.e. rotates
    /// the polygon about the origin.
    pub fn rotated_2d(&self, angle: f64) -> Result<Self, GeometryError> {
        if self.dim != 2 {
            return Err(GeometryError::UnsupportedDimension(self.dim));
        }
        let (s, c) = angle.sin_cos();
        let hs = self
            .halfspaces
            .iter()
            .map(|h| {
                let n = &h.normal;
                let mut r = vec![c * n[0] - s * n[1], s * n[0] + c * n[1]];
                let l = norm(&r);
                r.iter_mut().for_each(|v| *v /= l);
                HalfSpace::new(r, h.offset)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(hs)
    }

    /// Unit square rotated about the origin by `arctan φ`, φ the golden ratio.
    /// Its normals are `±(1, φ)/√(1+φ²)` and `±(−φ, 1)/√(1+φ²)`.
    pub fn golden_square() -> Self {
        let phi = 0.5 * (1.0 + 5f64.sqrt());
        Self::unit_square()
            .rotated_2d(phi.atan())
            .expect("rotation of a valid square")
    }

    pub fn from_doc(doc: &PolytopeDoc) -> Result<(Self, Vec<String>), GeometryError> {
        let mut warnings = Vec::new();
        let mut hs = Vec::with_capacity(doc.halfspaces.len());
        for (i, h) in doc.halfspaces.iter().enumerate() {
            if h.normal.len() != doc.dim {
                return Err(GeometryError::DimensionMismatch {
                    expected: doc.dim,
                    found: h.normal.len(),
                });
            }
            let (half, change) = HalfSpace::normalized(h.normal.clone(), h.offset)?;
            if change > RENORMALIZE_WARN {
                let msg = format!("half-space {i}: normal renormalized (|‖ν‖−1| = {change:.3e})");
                warn!("{msg}");
                warnings.push(msg);
            }
            hs.push(half);
        }
        Ok((Self::new(hs)?, warnings))
    }

    pub fn from_json_str(s: &str) -> Result<(Self, Vec<String>), GeometryError> {
        let doc: PolytopeDoc =
            serde_json::from_str(s).map_err(|e| GeometryError::Parse(e.to_string()))?;
        Self::from_doc(&doc)
    }

    pub fn to_doc(&self) -> PolytopeDoc {
        PolytopeDoc {
            dim: self.dim,
            halfspaces: self
                .halfspaces
                .iter()
                .map(|h| HalfSpaceDoc {
                    normal: h.normal.clone(),
                    offset: h.offset,
                })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }

    /// Chebyshev center: a strictly interior point.
    pub fn interior_point(&self) -> &[f64] {
        &self.interior_point
    }

    pub fn inradius(&self) -> f64 {
        self.inradius
    }

    pub fn bounding_box(&self) -> &[(f64, f64)] {
        &self.bbox
    }

    /// Faces with positive (d−1)-measure, one per non-degenerate half-space.
    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    /// Half-spaces whose active set has zero (d−1)-measure.
    pub fn degenerate_halfspaces(&self) -> &[usize] {
        &self.degenerate
    }

    pub fn face(&self, halfspace_index: usize) -> Option<&Face> {
        self.faces.iter().find(|f| f.index == halfspace_index)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.halfspaces.iter().all(|h| h.slack(x) >= -tol)
    }

    fn check_inside(&self, x: &[f64]) -> Result<(), GeometryError> {
        if x.len() != self.dim {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        for (i, h) in self.halfspaces.iter().enumerate() {
            let s = h.slack(x);
            if s < -GEOM_TOL {
                return Err(GeometryError::OutsideDomain { index: i, slack: s });
            }
        }
        Ok(())
    }

    /// `d(x) = min_j (ν_j·x − c_j)`, the distance to `∂D` for `x` in the
    /// closed polytope.
    pub fn distance_to_boundary(&self, x: &[f64]) -> Result<f64, GeometryError> {
        self.check_inside(x)?;
        Ok(self
            .halfspaces
            .iter()
            .map(|h| h.slack(x))
            .fold(f64::INFINITY, f64::min)
            .max(0.0))
    }

    /// Distance to the singular boundary `Γ*`: vertices for `d = 2`, closed
    /// edges for `d = 3`.
    pub fn distance_to_singular(&self, x: &[f64]) -> Result<f64, GeometryError> {
        if self.dim > 3 {
            return Err(GeometryError::UnsupportedDimension(self.dim));
        }
        self.check_inside(x)?;
        let mut best = f64::INFINITY;
        for f in &self.faces {
            for (a, b) in f.edges() {
                best = best.min(point_segment_distance(x, &a, &b));
            }
        }
        Ok(best)
    }

    /// Polygon vertices in counterclockwise order (`d = 2`).
    pub fn vertices_2d(&self) -> Result<Vec<[f64; 2]>, GeometryError> {
        Ok(self
            .face_cycle()?
            .iter()
            .map(|&i| match self.faces[i].shape {
                FaceShape::Segment { start, .. } => start,
                _ => unreachable!("2-D faces are segments"),
            })
            .collect())
    }

    /// Positions in [`faces`](Self::faces) ordered counterclockwise along the
    /// boundary (`d = 2`).
    pub fn face_cycle(&self) -> Result<Vec<usize>, GeometryError> {
        if self.dim != 2 {
            return Err(GeometryError::UnsupportedDimension(self.dim));
        }
        let mut order: Vec<(f64, usize)> = self
            .faces
            .iter()
            .enumerate()
            .map(|(pos, f)| {
                // tangent t = (ν₂, −ν₁)
                let ang = (-f.normal[0]).atan2(f.normal[1]);
                (ang, pos)
            })
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(order.into_iter().map(|(_, p)| p).collect())
    }

    pub fn area_2d(&self) -> Result<f64, GeometryError> {
        Ok(planar::signed_area(&self.vertices_2d()?))
    }

    pub fn boundary_measure(&self) -> Option<f64> {
        self.faces.iter().map(|f| f.measure()).sum()
    }

    pub fn diameter(&self) -> f64 {
        let verts: Vec<Vec<f64>> = self.faces.iter().flat_map(|f| f.vertices()).collect();
        if verts.is_empty() {
            return self
                .bbox
                .iter()
                .map(|(a, b)| (b - a) * (b - a))
                .sum::<f64>()
                .sqrt();
        }
        let mut d: f64 = 0.0;
        for i in 0..verts.len() {
            for j in i + 1..verts.len() {
                d = d.max(dist(&verts[i], &verts[j]));
            }
        }
        d
    }

    /// Pairs of face positions sharing a vertex (`d = 2`) or an edge (`d = 3`).
    pub fn adjacent_faces(&self) -> Result<Vec<(usize, usize)>, GeometryError> {
        match self.dim {
            2 => {
                let cyc = self.face_cycle()?;
                let n = cyc.len();
                let mut pairs: Vec<(usize, usize)> = (0..n)
                    .map(|i| {
                        let (a, b) = (cyc[i], cyc[(i + 1) % n]);
                        (a.min(b), a.max(b))
                    })
                    .collect();
                pairs.sort_unstable();
                pairs.dedup();
                Ok(pairs)
            }
            3 => {
                let mut pairs = Vec::new();
                for (i, fi) in self.faces.iter().enumerate() {
                    for (j, fj) in self.faces.iter().enumerate().skip(i + 1) {
                        let shares_edge = fi.edges().iter().any(|(a, b)| {
                            dist(a, b) > GEOM_TOL
                                && fj.plane_residual(a) <= 1e-9
                                && fj.plane_residual(b) <= 1e-9
                        });
                        if shares_edge {
                            pairs.push((i, j));
                        }
                    }
                }
                Ok(pairs)
            }
            d => Err(GeometryError::UnsupportedDimension(d)),
        }
    }

    /// Worst interior angle between adjacent faces, `ω = π − arccos(ν_i·ν_j)`,
    /// and `α*` from `π/(1+α*) = ω`.
    pub fn max_adjacent_angle(&self) -> Result<AngleReport, GeometryError> {
        let pairs = self.adjacent_faces()?;
        let mut best: Option<AngleReport> = None;
        for (i, j) in pairs {
            let (fi, fj) = (&self.faces[i], &self.faces[j]);
            let c = dot(&fi.normal, &fj.normal).clamp(-1.0, 1.0);
            let omega = PI - c.acos();
            if best.as_ref().map_or(true, |b| omega > b.omega_max) {
                best = Some(AngleReport {
                    omega_max: omega,
                    alpha_star: PI / omega - 1.0,
                    pair: (fi.index, fj.index),
                });
            }
        }
        best.ok_or_else(|| GeometryError::InvalidParameter("no adjacent faces".into()))
    }

    fn compute_faces(&mut self) -> Result<(), GeometryError> {
        let mut faces = Vec::new();
        let mut degenerate = Vec::new();
        for j in 0..self.halfspaces.len() {
            let face = match self.dim {
                2 => self.face_2d(j),
                3 => self.face_3d(j),
                _ => self.face_general(j)?,
            };
            match face {
                Some(f) => faces.push(f),
                None => {
                    warn!("half-space {j} touches the polytope in a set of zero measure; dropped");
                    degenerate.push(j);
                }
            }
        }
        self.faces = faces;
        self.degenerate = degenerate;
        Ok(())
    }

    fn face_2d(&self, j: usize) -> Option<Face> {
        let h = &self.halfspaces[j];
        let nu = [h.normal[0], h.normal[1]];
        let p0 = [nu[0] * h.offset, nu[1] * h.offset];
        let t = [nu[1], -nu[0]];
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for (i, g) in self.halfspaces.iter().enumerate() {
            if i == j {
                continue;
            }
            // g.n·(p0 + s t) >= g.c
            let a = g.normal[0] * t[0] + g.normal[1] * t[1];
            let b = g.offset - (g.normal[0] * p0[0] + g.normal[1] * p0[1]);
            if a.abs() <= 1e-14 {
                if b > GEOM_TOL {
                    return None;
                }
            } else if a > 0.0 {
                lo = lo.max(b / a);
            } else {
                hi = hi.min(b / a);
            }
        }
        if !(hi - lo > GEOM_TOL) {
            return None;
        }
        Some(Face {
            index: j,
            normal: h.normal.clone(),
            offset: h.offset,
            shape: FaceShape::Segment {
                start: [p0[0] + lo * t[0], p0[1] + lo * t[1]],
                end: [p0[0] + hi * t[0], p0[1] + hi * t[1]],
            },
        })
    }

    fn face_3d(&self, j: usize) -> Option<Face> {
        let h = &self.halfspaces[j];
        let frame = PlaneFrame::from_normal(&h.normal, h.offset);
        let center: Vec<f64> = self.bbox.iter().map(|(a, b)| 0.5 * (a + b)).collect();
        let radius = self
            .bbox
            .iter()
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
            + 1.0;
        let c = frame.to_local(&center);
        let mut poly = vec![
            [c[0] - radius, c[1] - radius],
            [c[0] + radius, c[1] - radius],
            [c[0] + radius, c[1] + radius],
            [c[0] - radius, c[1] + radius],
        ];
        for (i, g) in self.halfspaces.iter().enumerate() {
            if i == j {
                continue;
            }
            let a = [dot(&g.normal, &frame.e1), dot(&g.normal, &frame.e2)];
            let rhs = g.offset - dot(&g.normal, &frame.origin);
            if planar::len2(a) <= 1e-14 {
                if rhs > GEOM_TOL {
                    return None;
                }
                continue;
            }
            poly = planar::clip_halfplane(&poly, a, rhs);
            if poly.len() < 3 {
                return None;
            }
        }
        let poly = dedup_ring(poly, 1e-13);
        if poly.len() < 3 || planar::signed_area(&poly) <= GEOM_TOL {
            return None;
        }
        let vertices = poly.iter().map(|&q| frame.to_global(q)).collect();
        Some(Face {
            index: j,
            normal: h.normal.clone(),
            offset: h.offset,
            shape: FaceShape::Polygon {
                vertices,
                local: poly,
                frame,
            },
        })
    }

    fn face_general(&self, j: usize) -> Result<Option<Face>, GeometryError> {
        let mut lp = Problem::new(OptimizationDirection::Maximize);
        let xs: Vec<_> = (0..self.dim)
            .map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
            .collect();
        let t = lp.add_var(1.0, (f64::NEG_INFINITY, 1.0));
        for (i, g) in self.halfspaces.iter().enumerate() {
            let mut terms: Vec<_> = xs.iter().zip(&g.normal).map(|(&v, &c)| (v, c)).collect();
            if i == j {
                lp.add_constraint(terms.as_slice(), ComparisonOp::Eq, g.offset);
            } else {
                terms.push((t, -1.0));
                lp.add_constraint(terms.as_slice(), ComparisonOp::Ge, g.offset);
            }
        }
        let value = solve_lp(&lp)?;
        let h = &self.halfspaces[j];
        Ok((value > GEOM_TOL).then(|| Face {
            index: j,
            normal: h.normal.clone(),
            offset: h.offset,
            shape: FaceShape::Implicit,
        }))
    }
}

fn dedup_ring(poly: Vec<P2>, tol: f64) -> Vec<P2> {
    let mut out: Vec<P2> = Vec::with_capacity(poly.len());
    for p in poly {
        if out
            .last()
            .map_or(true, |q| planar::len2(planar::sub(p, *q)) > tol)
        {
            out.push(p);
        }
    }
    while out.len() > 1 && planar::len2(planar::sub(out[0], *out.last().unwrap())) <= tol {
        out.pop();
    }
    out
}

fn solve_lp(lp: &Problem) -> Result<f64, GeometryError> {
    match lp.solve() {
        Ok(outcome) => outcome
            .into_solution()
            .map(|s| s.objective())
            .map_err(|_| GeometryError::LinearProgram("interrupted".into())),
        Err(microlp::Error::Unbounded) => Err(GeometryError::Unbounded),
        Err(microlp::Error::Infeasible) => Err(GeometryError::EmptyInterior),
        Err(e) => Err(GeometryError::LinearProgram(e.to_string())),
    }
}

/// Maximizes `t` subject to `ν_j·x − t ≥ c_j`, `t ≤ 1`.
fn chebyshev_center(dim: usize, hs: &[HalfSpace]) -> Result<(Vec<f64>, f64), GeometryError> {
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let xs: Vec<_> = (0..dim)
        .map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    let t = lp.add_var(1.0, (f64::NEG_INFINITY, 1.0));
    for h in hs {
        let mut terms: Vec<_> = xs.iter().zip(&h.normal).map(|(&v, &c)| (v, c)).collect();
        terms.push((t, -1.0));
        lp.add_constraint(terms.as_slice(), ComparisonOp::Ge, h.offset);
    }
    let sol = match lp.solve() {
        Ok(o) => o
            .into_solution()
            .map_err(|_| GeometryError::LinearProgram("interrupted".into()))?,
        Err(microlp::Error::Infeasible) => return Err(GeometryError::EmptyInterior),
        Err(e) => return Err(GeometryError::LinearProgram(e.to_string())),
    };
    let x: Vec<f64> = xs.iter().map(|&v| sol.var_value(v)).collect();
    // re-measure rather than trust the LP's objective
    let r = hs.iter().map(|h| h.slack(&x)).fold(f64::INFINITY, f64::min);
    Ok((x, r))
}

/// Coordinate extents via `2d` linear programs; any unbounded one means the
/// polytope is unbounded.
fn bounding_box(dim: usize, hs: &[HalfSpace]) -> Result<Vec<(f64, f64)>, GeometryError> {
    let mut out = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut ext = [0.0; 2];
        for (k, dir) in [OptimizationDirection::Minimize, OptimizationDirection::Maximize]
            .into_iter()
            .enumerate()
        {
            let mut lp = Problem::new(dir);
            let xs: Vec<_> = (0..dim)
                .map(|l| {
                    lp.add_var(
                        if l == i { 1.0 } else { 0.0 },
                        (f64::NEG_INFINITY, f64::INFINITY),
                    )
                })
                .collect();
            for h in hs {
                let terms: Vec<_> = xs.iter().zip(&h.normal).map(|(&v, &c)| (v, c)).collect();
                lp.add_constraint(terms.as_slice(), ComparisonOp::Ge, h.offset);
            }
            ext[k] = solve_lp(&lp)?;
        }
        out.push((ext[0], ext[1]));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hs(n: &[f64], c: f64) -> HalfSpace {
        HalfSpace::new(n.to_vec(), c).unwrap()
    }

    #[test]
    fn unit_square_has_four_unit_faces() {
        let sq = ConvexPolytope::unit_square();
        assert_eq!(sq.halfspaces().len(), 4);
        assert_eq!(sq.faces().len(), 4);
        for f in sq.faces() {
            assert!((f.measure().unwrap() - 1.0).abs() < 1e-12);
        }
        assert!((sq.area_2d().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn open_cone_is_unbounded() {
        let r = build_polytope(vec![
            hs(&[1.0, 0.0], 0.0),
            hs(&[0.0, 1.0], 0.0),
            hs(&[-std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2], -1e6),
        ]);
        // third constraint x₁+x₂ < 1e6·√2 still closes the cone; drop it
        assert!(r.is_ok());
        let r = build_polytope(vec![hs(&[1.0, 0.0], 0.0), hs(&[0.0, 1.0], 0.0)]);
        assert_eq!(r.unwrap_err(), GeometryError::Unbounded);
    }

    #[test]
    fn empty_and_bad_inputs() {
        let r = build_polytope(vec![hs(&[1.0, 0.0], 1.0), hs(&[-1.0, 0.0], -0.5)]);
        assert_eq!(r.unwrap_err(), GeometryError::EmptyInterior);
        assert!(matches!(
            HalfSpace::new(vec![1.0, 1.0], 0.0),
            Err(GeometryError::BadNormal { .. })
        ));
        assert_eq!(
            build_polytope(vec![]).unwrap_err(),
            GeometryError::NoHalfSpaces
        );
        let sq = ConvexPolytope::unit_square();
        let mut dup = sq.halfspaces().to_vec();
        dup.push(dup[0].clone());
        assert_eq!(
            build_polytope(dup).unwrap_err(),
            GeometryError::DuplicateHalfSpace(0, 4)
        );
    }

    #[test]
    fn redundant_tangent_halfspace_is_dropped() {
        let sq = ConvexPolytope::unit_square();
        let mut list = sq.halfspaces().to_vec();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        list.push(hs(&[s, s], 0.0));
        let p = build_polytope(list).unwrap();
        assert_eq!(p.faces().len(), 4);
        assert_eq!(p.degenerate_halfspaces(), &[4]);
    }

    #[test]
    fn distances_on_unit_square() {
        let sq = ConvexPolytope::unit_square();
        assert_eq!(sq.distance_to_boundary(&[0.5, 0.5]).unwrap(), 0.5);
        assert!((sq.distance_to_boundary(&[0.1, 0.5]).unwrap() - 0.1).abs() < 1e-15);
        assert!(matches!(
            sq.distance_to_boundary(&[1.5, 0.5]),
            Err(GeometryError::OutsideDomain { .. })
        ));
        let ds = sq.distance_to_singular(&[0.5, 0.5]).unwrap();
        assert!((ds - 0.5f64.sqrt()).abs() < 1e-15);
        let ds = sq.distance_to_singular(&[0.1, 0.1]).unwrap();
        assert!((ds - 2f64.sqrt() * 0.1).abs() < 1e-15);
    }

    #[test]
    fn cube_faces_and_singular_distance() {
        let cube = ConvexPolytope::unit_cube();
        assert_eq!(cube.faces().len(), 6);
        for f in cube.faces() {
            assert!((f.measure().unwrap() - 1.0).abs() < 1e-12);
        }
        let d = cube.distance_to_singular(&[0.5, 0.5, 0.1]).unwrap();
        // brute force over the 12 edges
        let mut best = f64::INFINITY;
        for axis in 0..3 {
            for a in [0.0, 1.0] {
                for b in [0.0, 1.0] {
                    let mut p = [0.0; 3];
                    let mut q = [1.0; 3];
                    let others: Vec<usize> = (0..3).filter(|&i| i != axis).collect();
                    p[others[0]] = a;
                    q[others[0]] = a;
                    p[others[1]] = b;
                    q[others[1]] = b;
                    p[axis] = 0.0;
                    q[axis] = 1.0;
                    best = best.min(point_segment_distance(&[0.5, 0.5, 0.1], &p, &q));
                }
            }
        }
        assert!((d - best).abs() < 1e-15);
        // nearest edges lie on the bottom face: offset 0.5 sideways, 0.1 down
        assert!((d - 0.26f64.sqrt()).abs() < 1e-12);
        let ang = cube.max_adjacent_angle().unwrap();
        assert!((ang.omega_max - PI / 2.0).abs() < 1e-12);
        assert!(matches!(
            ConvexPolytope::axis_box(&[0.0; 4], &[1.0; 4])
                .unwrap()
                .distance_to_singular(&[0.5; 4]),
            Err(GeometryError::UnsupportedDimension(4))
        ));
    }

    #[test]
    fn four_dimensional_box_has_implicit_faces() {
        let b = ConvexPolytope::axis_box(&[0.0; 4], &[1.0; 4]).unwrap();
        assert_eq!(b.faces().len(), 8);
        assert!(b.faces().iter().all(|f| f.shape == FaceShape::Implicit));
    }

    #[test]
    fn hexagon_angles() {
        let hex = ConvexPolytope::regular_polygon(6, 1.0, [0.0, 0.0]).unwrap();
        let a = hex.max_adjacent_angle().unwrap();
        assert!((a.omega_max - 2.0 * PI / 3.0).abs() < 1e-12);
        assert!((a.alpha_star - 0.5).abs() < 1e-12);
        let sq = ConvexPolytope::unit_square().max_adjacent_angle().unwrap();
        assert!((sq.alpha_star - 1.0).abs() < 1e-12);
    }

    #[test]
    fn json_load_renormalizes_with_warning() {
        let s = r#"{"dim":2,"halfspaces":[
            {"normal":[2.0,0.0],"offset":0.0},{"normal":[-1.0,0.0],"offset":-1.0},
            {"normal":[0.0,1.0],"offset":0.0},{"normal":[0.0,-1.0],"offset":-1.0}]}"#;
        let (p, w) = ConvexPolytope::from_json_str(s).unwrap();
        assert_eq!(p.faces().len(), 4);
        assert_eq!(w.len(), 1);
        let back = serde_json::to_string(&p.to_doc()).unwrap();
        let (q, w2) = ConvexPolytope::from_json_str(&back).unwrap();
        assert!(w2.is_empty());
        assert_eq!(q.halfspaces(), p.halfspaces());
    }
}
