use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use crate::geometry::planar::{self, P2};
use crate::geometry::{ConvexPolytope, FaceShape, GeometryError};

use super::{FemError, VERTEX_CAP};

/// Smallest edge allowed by graded refinement, relative to `h`.
const GRADING_FLOOR: f64 = 1e-3;

/// A boundary edge, oriented counterclockwise along `∂D`, tagged with the
/// half-space index of the face it lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub v: [u32; 2],
    pub face: usize,
}

/// One coarse level of a uniformly refined mesh.
#[derive(Clone, Debug)]
pub(crate) struct Level {
    pub n_vertices: usize,
    pub triangles: Vec<[u32; 3]>,
}

/// Nested coarse levels produced by red refinement. Vertices keep their
/// indices across levels, so level `l` uses the first `n_vertices` entries
/// of the fine vertex array.
#[derive(Clone, Debug, Default)]
pub struct MeshHierarchy {
    pub(crate) levels: Vec<Level>,
    /// `parents[l][i]`: the edge whose midpoint is vertex
    /// `levels[l].n_vertices + i` on the next level.
    pub(crate) parents: Vec<Vec<[u32; 2]>>,
}

impl MeshHierarchy {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }
}

#[derive(Clone, Debug)]
pub struct TriMesh {
    pub vertices: Vec<P2>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[u32; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub grading: f64,
    /// Vertex indices of the polygon corners.
    pub corners: Vec<u32>,
    pub(crate) hierarchy: Option<MeshHierarchy>,
}

impl TriMesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn hierarchy(&self) -> Option<&MeshHierarchy> {
        self.hierarchy.as_ref()
    }

    pub fn corner(&self, t: usize) -> [P2; 3] {
        let [a, b, c] = self.triangles[t];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corner(t);
        0.5 * planar::cross(planar::sub(b, a), planar::sub(c, a))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.signed_area(t)).sum()
    }

    pub fn max_edge(&self) -> f64 {
        self.edge_lengths().fold(0.0, f64::max)
    }

    pub fn min_edge(&self) -> f64 {
        self.edge_lengths().fold(f64::INFINITY, f64::min)
    }

    fn edge_lengths(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_triangles()).flat_map(move |t| {
            let p = self.corner(t);
            (0..3).map(move |i| planar::len2(planar::sub(p[(i + 1) % 3], p[i])))
        })
    }

    /// Largest interior angle over all triangles, in radians.
    pub fn max_angle(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for t in 0..self.n_triangles() {
            let p = self.corner(t);
            for i in 0..3 {
                let u = planar::sub(p[(i + 1) % 3], p[i]);
                let v = planar::sub(p[(i + 2) % 3], p[i]);
                let c = planar::dot2(u, v) / (planar::len2(u) * planar::len2(v));
                worst = worst.max(c.clamp(-1.0, 1.0).acos());
            }
        }
        worst
    }

    pub fn boundary_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_vertices()];
        for e in &self.boundary_edges {
            mask[e.v[0] as usize] = true;
            mask[e.v[1] as usize] = true;
        }
        mask
    }

    /// Checks conformity, orientation and that boundary edges lie on their
    /// faces.
    pub fn validate(&self, poly: &ConvexPolytope) -> Result<(), FemError> {
        for t in 0..self.n_triangles() {
            if !(self.signed_area(t) > 0.0) {
                return Err(FemError::InvalidMesh(format!(
                    "triangle {t} has non-positive area"
                )));
            }
        }
        let mut count: HashMap<(u32, u32), u32> = HashMap::new();
        for tri in &self.triangles {
            for i in 0..3 {
                *count.entry(key(tri[i], tri[(i + 1) % 3])).or_default() += 1;
            }
        }
        let mut bset: HashMap<(u32, u32), usize> = HashMap::new();
        for e in &self.boundary_edges {
            bset.insert(key(e.v[0], e.v[1]), e.face);
        }
        for (e, &c) in &count {
            match (c, bset.contains_key(e)) {
                (1, true) | (2, false) => {}
                _ => {
                    return Err(FemError::InvalidMesh(format!(
                        "edge {e:?} is shared by {c} triangles"
                    )))
                }
            }
        }
        if bset.len() != self.boundary_edges.len() || bset.keys().any(|e| !count.contains_key(e)) {
            return Err(FemError::InvalidMesh("stray boundary edge".into()));
        }
        for e in &self.boundary_edges {
            let h = &poly.halfspaces()[e.face];
            for &v in &e.v {
                let s = h.slack(&self.vertices[v as usize]).abs();
                if s > 1e-10 {
                    return Err(FemError::InvalidMesh(format!(
                        "boundary vertex {v} is {s:e} off face {}",
                        e.face
                    )));
                }
            }
        }
        Ok(())
    }
}

fn key(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn midpoint(a: P2, b: P2) -> P2 {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

/// Fan triangulation from the centroid, refined uniformly until the longest
/// edge is at most `h`; with `grading > 0`, additionally bisected near every
/// polygon vertex until the local edge is at most
/// `h·(d_*(centroid)/diam)^grading` (floored at `10⁻³·h`).
pub fn triangulate(poly: &ConvexPolytope, h: f64, grading: f64) -> Result<TriMesh, FemError> {
    let corners = poly.vertices_2d()?;
    triangulate_graded(poly, h, grading, &corners)
}

/// As [`triangulate`], grading only toward the listed points.
pub fn triangulate_graded(
    poly: &ConvexPolytope,
    h: f64,
    grading: f64,
    grade_toward: &[P2],
) -> Result<TriMesh, FemError> {
    if poly.dim() != 2 {
        return Err(GeometryError::UnsupportedDimension(poly.dim()).into());
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(FemError::InvalidParameter(format!("h must be positive, got {h}")));
    }
    if !(grading >= 0.0) {
        return Err(FemError::InvalidParameter(format!(
            "grading must be non-negative, got {grading}"
        )));
    }
    let mut mesh = fan(poly)?;
    let mut hierarchy = MeshHierarchy::default();
    while mesh.max_edge() > h {
        let n_edges = mesh.n_vertices() + mesh.n_triangles() - 1;
        let needed = mesh.n_vertices() + n_edges;
        if needed > VERTEX_CAP {
            return Err(FemError::BudgetExceeded {
                needed,
                cap: VERTEX_CAP,
            });
        }
        let (fine, parents) = refine_red(&mesh);
        hierarchy.levels.push(Level {
            n_vertices: mesh.n_vertices(),
            triangles: std::mem::take(&mut mesh.triangles),
        });
        hierarchy.parents.push(parents);
        mesh = fine;
    }
    if grading > 0.0 && !grade_toward.is_empty() {
        let diam = poly.diameter();
        let mut b = Bisector::new(mesh);
        b.grade(h, grading, diam, grade_toward)?;
        mesh = b.finish();
        mesh.grading = grading;
    } else {
        mesh.hierarchy = Some(hierarchy);
    }
    Ok(mesh)
}

fn fan(poly: &ConvexPolytope) -> Result<TriMesh, FemError> {
    let cycle = poly.face_cycle()?;
    let verts = poly.vertices_2d()?;
    let n = verts.len();
    let c = planar::centroid(&verts);
    let mut vertices = verts.clone();
    vertices.push(c);
    let center = n as u32;
    let mut triangles = Vec::with_capacity(n);
    let mut boundary_edges = Vec::with_capacity(n);
    for i in 0..n {
        let a = i as u32;
        let b = ((i + 1) % n) as u32;
        triangles.push([center, a, b]);
        boundary_edges.push(BoundaryEdge {
            v: [a, b],
            face: poly.faces()[cycle[i]].index,
        });
    }
    Ok(TriMesh {
        vertices,
        triangles,
        boundary_edges,
        grading: 0.0,
        corners: (0..n as u32).collect(),
        hierarchy: None,
    })
}

/// Splits every triangle into four through its edge midpoints. Returns the
/// refined mesh and the parent edge of every new vertex.
fn refine_red(mesh: &TriMesh) -> (TriMesh, Vec<[u32; 2]>) {
    let nv = mesh.n_vertices();
    let mut vertices = mesh.vertices.clone();
    let mut parents = Vec::new();
    let mut mid: HashMap<(u32, u32), u32> = HashMap::with_capacity(nv + mesh.n_triangles());
    let mut get_mid = |a: u32, b: u32, vertices: &mut Vec<P2>| -> u32 {
        *mid.entry(key(a, b)).or_insert_with(|| {
            let idx = vertices.len() as u32;
            vertices.push(midpoint(vertices[a as usize], vertices[b as usize]));
            let (lo, hi) = key(a, b);
            parents.push([lo, hi]);
            idx
        })
    };
    let mut triangles = Vec::with_capacity(4 * mesh.n_triangles());
    for &[a, b, c] in &mesh.triangles {
        let ab = get_mid(a, b, &mut vertices);
        let bc = get_mid(b, c, &mut vertices);
        let ca = get_mid(c, a, &mut vertices);
        triangles.push([a, ab, ca]);
        triangles.push([ab, b, bc]);
        triangles.push([ca, bc, c]);
        triangles.push([ab, bc, ca]);
    }
    let mut boundary_edges = Vec::with_capacity(2 * mesh.boundary_edges.len());
    for e in &mesh.boundary_edges {
        let m = get_mid(e.v[0], e.v[1], &mut vertices);
        boundary_edges.push(BoundaryEdge {
            v: [e.v[0], m],
            face: e.face,
        });
        boundary_edges.push(BoundaryEdge {
            v: [m, e.v[1]],
            face: e.face,
        });
    }
    drop(get_mid);
    (
        TriMesh {
            vertices,
            triangles,
            boundary_edges,
            grading: mesh.grading,
            corners: mesh.corners.clone(),
            hierarchy: None,
        },
        parents,
    )
}

const NONE: u32 = u32::MAX;

/// Conforming longest-edge bisection (Rivara's LEPP refinement).
struct Bisector {
    vertices: Vec<P2>,
    triangles: Vec<[u32; 3]>,
    edges: HashMap<(u32, u32), [u32; 2]>,
    boundary: BTreeMap<(u32, u32), usize>,
    corners: Vec<u32>,
}

impl Bisector {
    fn new(mesh: TriMesh) -> Self {
        let mut edges: HashMap<(u32, u32), [u32; 2]> = HashMap::new();
        for (t, tri) in mesh.triangles.iter().enumerate() {
            for i in 0..3 {
                let slot = edges.entry(key(tri[i], tri[(i + 1) % 3])).or_insert([NONE, NONE]);
                if slot[0] == NONE {
                    slot[0] = t as u32;
                } else {
                    slot[1] = t as u32;
                }
            }
        }
        let boundary = mesh
            .boundary_edges
            .iter()
            .map(|e| (key(e.v[0], e.v[1]), e.face))
            .collect();
        Self {
            vertices: mesh.vertices,
            triangles: mesh.triangles,
            edges,
            boundary,
            corners: mesh.corners,
        }
    }

    fn len(&self, a: u32, b: u32) -> f64 {
        planar::len2(planar::sub(self.vertices[a as usize], self.vertices[b as usize]))
    }

    /// Local slot `i` of the longest edge `(t_i, t_{i+1})`, ties broken by
    /// vertex indices so that the order on edges is total.
    fn longest(&self, t: u32) -> usize {
        let tri = self.triangles[t as usize];
        let mut best = 0;
        for i in 1..3 {
            let (a, b) = (tri[i], tri[(i + 1) % 3]);
            let (c, d) = (tri[best], tri[(best + 1) % 3]);
            let (la, lc) = (self.len(a, b), self.len(c, d));
            if la > lc || (la == lc && key(a, b) > key(c, d)) {
                best = i;
            }
        }
        best
    }

    fn longest_key(&self, t: u32) -> (u32, u32) {
        let tri = self.triangles[t as usize];
        let i = self.longest(t);
        key(tri[i], tri[(i + 1) % 3])
    }

    fn other(&self, e: (u32, u32), t: u32) -> Option<u32> {
        let s = self.edges[&e];
        let o = if s[0] == t { s[1] } else { s[0] };
        (o != NONE).then_some(o)
    }

    fn detach(&mut self, t: u32) {
        let tri = self.triangles[t as usize];
        for i in 0..3 {
            let e = key(tri[i], tri[(i + 1) % 3]);
            let slot = self.edges.get_mut(&e).expect("edge present");
            if slot[0] == t {
                slot[0] = slot[1];
            }
            slot[1] = NONE;
            if slot[0] == NONE {
                self.edges.remove(&e);
            }
        }
    }

    fn attach(&mut self, t: u32) {
        let tri = self.triangles[t as usize];
        for i in 0..3 {
            let slot = self
                .edges
                .entry(key(tri[i], tri[(i + 1) % 3]))
                .or_insert([NONE, NONE]);
            if slot[0] == NONE {
                slot[0] = t;
            } else {
                slot[1] = t;
            }
        }
    }

    /// Replaces `t` by its two halves across edge `e`, reusing slot `t`.
    fn halve(&mut self, t: u32, e: (u32, u32), m: u32) {
        let tri = self.triangles[t as usize];
        let i = (0..3)
            .find(|&i| key(tri[i], tri[(i + 1) % 3]) == e)
            .expect("edge belongs to triangle");
        let (a, b, c) = (tri[i], tri[(i + 1) % 3], tri[(i + 2) % 3]);
        self.detach(t);
        self.triangles[t as usize] = [a, m, c];
        let u = self.triangles.len() as u32;
        self.triangles.push([m, b, c]);
        self.attach(t);
        self.attach(u);
    }

    fn bisect(&mut self, t0: u32) {
        let mut stack = vec![t0];
        while let Some(&t) = stack.last() {
            let e = self.longest_key(t);
            match self.other(e, t) {
                Some(u) if self.longest_key(u) != e => stack.push(u),
                nb => {
                    let m = self.vertices.len() as u32;
                    self.vertices
                        .push(midpoint(self.vertices[e.0 as usize], self.vertices[e.1 as usize]));
                    self.halve(t, e, m);
                    match nb {
                        Some(u) => self.halve(u, e, m),
                        None => {
                            let face = self.boundary.remove(&e).expect("boundary edge is tagged");
                            self.boundary.insert(key(e.0, m), face);
                            self.boundary.insert(key(m, e.1), face);
                        }
                    }
                    stack.pop();
                }
            }
        }
    }

    fn grade(&mut self, h: f64, grading: f64, diam: f64, toward: &[P2]) -> Result<(), FemError> {
        let floor = h * GRADING_FLOOR;
        let target = |p: P2| -> f64 {
            let d = toward
                .iter()
                .map(|q| planar::len2(planar::sub(p, *q)))
                .fold(f64::INFINITY, f64::min);
            (h * (d / diam).powf(grading)).max(floor)
        };
        loop {
            let mut changed = false;
            let mut t = 0;
            while t < self.triangles.len() {
                loop {
                    let tri = self.triangles[t];
                    let p = [0, 1, 2].map(|i| self.vertices[tri[i] as usize]);
                    let c = [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0];
                    let i = self.longest(t as u32);
                    let l = self.len(tri[i], tri[(i + 1) % 3]);
                    if l <= target(c) {
                        break;
                    }
                    if self.vertices.len() >= VERTEX_CAP {
                        return Err(FemError::BudgetExceeded {
                            needed: self.vertices.len() + 1,
                            cap: VERTEX_CAP,
                        });
                    }
                    self.bisect(t as u32);
                    changed = true;
                }
                t += 1;
            }
            if !changed {
                return Ok(());
            }
        }
    }

    fn finish(self) -> TriMesh {
        let mut boundary_edges = Vec::with_capacity(self.boundary.len());
        for (&(a, b), &face) in &self.boundary {
            let t = self.edges[&(a, b)][0];
            let tri = self.triangles[t as usize];
            // orient as in the owning (counterclockwise) triangle
            let forward = (0..3).any(|i| tri[i] == a && tri[(i + 1) % 3] == b);
            boundary_edges.push(BoundaryEdge {
                v: if forward { [a, b] } else { [b, a] },
                face,
            });
        }
        TriMesh {
            vertices: self.vertices,
            triangles: self.triangles,
            boundary_edges,
            grading: 0.0,
            corners: self.corners,
            hierarchy: None,
        }
    }
}

/// Arclength interval `[start, end]` on a face, measured from the face's
/// first vertex in counterclockwise order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryArc {
    pub face: usize,
    pub start: f64,
    pub end: f64,
}

fn face_frame(poly: &ConvexPolytope, face: usize) -> Result<(P2, P2, f64), FemError> {
    let f = poly.face(face).ok_or_else(|| {
        FemError::InvalidParameter(format!("half-space {face} has no face"))
    })?;
    match f.shape {
        FaceShape::Segment { start, end } => {
            let d = planar::sub(end, start);
            let l = planar::len2(d);
            Ok((start, [d[0] / l, d[1] / l], l))
        }
        _ => Err(GeometryError::UnsupportedDimension(poly.dim()).into()),
    }
}

/// Moves one boundary vertex of the face onto each arc endpoint so that the
/// arcs become unions of boundary edges. Corners never move. Vertices are
/// shifted along the face line only; the caller should keep `h` well below
/// the arc lengths.
pub fn align_to_arcs(
    mesh: &mut TriMesh,
    poly: &ConvexPolytope,
    arcs: &[BoundaryArc],
) -> Result<(), FemError> {
    let corner: Vec<bool> = {
        let mut c = vec![false; mesh.n_vertices()];
        for &v in &mesh.corners {
            c[v as usize] = true;
        }
        c
    };
    let mut moved = vec![false; mesh.n_vertices()];
    for arc in arcs {
        let (origin, dir, len) = face_frame(poly, arc.face)?;
        if !(arc.start < arc.end) || arc.start < -1e-12 || arc.end > len + 1e-12 {
            return Err(FemError::InvalidParameter(format!(
                "arc [{}, {}] does not fit face {} of length {len}",
                arc.start, arc.end, arc.face
            )));
        }
        let mut on_face: Vec<u32> = mesh
            .boundary_edges
            .iter()
            .filter(|e| e.face == arc.face)
            .flat_map(|e| e.v)
            .filter(|&v| !corner[v as usize])
            .collect();
        on_face.sort_unstable();
        on_face.dedup();
        for s in [arc.start, arc.end] {
            if s <= 1e-12 || s >= len - 1e-12 {
                continue;
            }
            let target = [origin[0] + s * dir[0], origin[1] + s * dir[1]];
            // shared endpoints of adjacent arcs, or vertices already in place
            if on_face.iter().any(|&v| {
                planar::len2(planar::sub(mesh.vertices[v as usize], target)) <= 1e-12 * len
            }) {
                continue;
            }
            let best = on_face
                .iter()
                .copied()
                .filter(|&v| !moved[v as usize])
                .min_by(|&a, &b| {
                    let da = planar::len2(planar::sub(mesh.vertices[a as usize], target));
                    let db = planar::len2(planar::sub(mesh.vertices[b as usize], target));
                    da.total_cmp(&db).then(a.cmp(&b))
                })
                .ok_or_else(|| {
                    FemError::InvalidParameter(format!("face {} has no free boundary vertex", arc.face))
                })?;
            mesh.vertices[best as usize] = target;
            moved[best as usize] = true;
        }
    }
    if let Some(t) = (0..mesh.n_triangles()).find(|&t| !(mesh.signed_area(t) > 0.0)) {
        return Err(FemError::InvalidMesh(format!(
            "alignment inverted triangle {t}; refine the mesh"
        )));
    }
    Ok(())
}

/// Marks the boundary edges whose midpoints fall inside one of the arcs.
pub fn arc_edges(
    mesh: &TriMesh,
    poly: &ConvexPolytope,
    arcs: &[BoundaryArc],
) -> Result<Vec<bool>, FemError> {
    let mut frames = HashMap::new();
    for arc in arcs {
        frames.insert(arc.face, face_frame(poly, arc.face)?);
    }
    Ok(mesh
        .boundary_edges
        .iter()
        .map(|e| {
            let Some(&(origin, dir, _)) = frames.get(&e.face) else {
                return false;
            };
            let m = midpoint(mesh.vertices[e.v[0] as usize], mesh.vertices[e.v[1] as usize]);
            let s = planar::dot2(planar::sub(m, origin), dir);
            arcs.iter()
                .any(|a| a.face == e.face && a.start <= s && s <= a.end)
        })
        .collect())
}

/// Flat text format: vertex count, `x y` lines, triangle count, `a b c`
/// lines, boundary edge count, `a b face` lines.
pub fn write_mesh<W: Write>(mesh: &TriMesh, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{}", mesh.n_vertices())?;
    for p in &mesh.vertices {
        writeln!(w, "{} {}", p[0], p[1])?;
    }
    writeln!(w, "{}", mesh.n_triangles())?;
    for t in &mesh.triangles {
        writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(w, "{}", mesh.boundary_edges.len())?;
    for e in &mesh.boundary_edges {
        writeln!(w, "{} {} {}", e.v[0], e.v[1], e.face)?;
    }
    Ok(())
}

pub fn read_mesh<R: BufRead>(r: R) -> Result<TriMesh, FemError> {
    let mut lines = r.lines();
    let mut next = || -> Result<String, FemError> {
        lines
            .next()
            .ok_or_else(|| FemError::Parse("unexpected end of file".into()))?
            .map_err(|e| FemError::Parse(e.to_string()))
    };
    fn nums<T: std::str::FromStr>(s: &str, n: usize) -> Result<Vec<T>, FemError> {
        let v: Vec<T> = s
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| FemError::Parse(format!("bad token {t:?}"))))
            .collect::<Result<_, _>>()?;
        if v.len() != n {
            return Err(FemError::Parse(format!("expected {n} fields in {s:?}")));
        }
        Ok(v)
    }
    let nv = nums::<usize>(&next()?, 1)?[0];
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let v = nums::<f64>(&next()?, 2)?;
        vertices.push([v[0], v[1]]);
    }
    let nt = nums::<usize>(&next()?, 1)?[0];
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let t = nums::<u32>(&next()?, 3)?;
        if t.iter().any(|&i| i as usize >= nv) {
            return Err(FemError::Parse("triangle index out of range".into()));
        }
        triangles.push([t[0], t[1], t[2]]);
    }
    let nb = nums::<usize>(&next()?, 1)?[0];
    let mut boundary_edges = Vec::with_capacity(nb);
    for _ in 0..nb {
        let e = nums::<usize>(&next()?, 3)?;
        if e[0] >= nv || e[1] >= nv {
            return Err(FemError::Parse("boundary edge index out of range".into()));
        }
        boundary_edges.push(BoundaryEdge {
            v: [e[0] as u32, e[1] as u32],
            face: e[2],
        });
    }
    // corners: boundary vertices whose two boundary edges lie on different faces
    let mut faces_at: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for e in &boundary_edges {
        for &v in &e.v {
            faces_at.entry(v).or_default().push(e.face);
        }
    }
    let corners = faces_at
        .into_iter()
        .filter(|(_, f)| f.iter().any(|&x| x != f[0]))
        .map(|(v, _)| v)
        .collect();
    Ok(TriMesh {
        vertices,
        triangles,
        boundary_edges,
        grading: 0.0,
        corners,
        hierarchy: None,
    })
}
