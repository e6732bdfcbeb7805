//! Small planar helpers shared by the face constructions and the mesher.

pub type P2 = [f64; 2];

#[inline]
pub fn sub(a: P2, b: P2) -> P2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn cross(a: P2, b: P2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn dot2(a: P2, b: P2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn len2(a: P2) -> f64 {
    dot2(a, a).sqrt()
}

/// Signed area (positive for counterclockwise order).
pub fn signed_area(poly: &[P2]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        s += cross(poly[i], poly[(i + 1) % n]);
    }
    0.5 * s
}

pub fn centroid(poly: &[P2]) -> P2 {
    let a = signed_area(poly);
    if a.abs() < 1e-300 {
        let n = poly.len() as f64;
        let sx: f64 = poly.iter().map(|p| p[0]).sum();
        let sy: f64 = poly.iter().map(|p| p[1]).sum();
        return [sx / n, sy / n];
    }
    let n = poly.len();
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let w = cross(p, q);
        cx += (p[0] + q[0]) * w;
        cy += (p[1] + q[1]) * w;
    }
    [cx / (6.0 * a), cy / (6.0 * a)]
}

/// Sutherland–Hodgman clip keeping `{x : a·x >= rhs}`.
pub fn clip_halfplane(poly: &[P2], a: P2, rhs: f64) -> Vec<P2> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    if n == 0 {
        return out;
    }
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let fp = dot2(a, p) - rhs;
        let fq = dot2(a, q) - rhs;
        if fp >= 0.0 {
            out.push(p);
        }
        if (fp >= 0.0) != (fq >= 0.0) {
            let t = fp / (fp - fq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

/// Intersection of two convex polygons (the clip polygon must be CCW).
pub fn clip_convex(subject: &[P2], clip_ccw: &[P2]) -> Vec<P2> {
    let mut out = subject.to_vec();
    let n = clip_ccw.len();
    for i in 0..n {
        if out.is_empty() {
            break;
        }
        let a = clip_ccw[i];
        let b = clip_ccw[(i + 1) % n];
        let e = sub(b, a);
        let normal = [-e[1], e[0]];
        out = clip_halfplane(&out, normal, dot2(normal, a));
    }
    out
}

/// True if `p` lies in the closed convex CCW polygon within `tol`
/// (measured as a distance to each edge line).
pub fn contains_convex(poly_ccw: &[P2], p: P2, tol: f64) -> bool {
    let n = poly_ccw.len();
    (0..n).all(|i| {
        let a = poly_ccw[i];
        let b = poly_ccw[(i + 1) % n];
        let e = sub(b, a);
        let l = len2(e);
        l == 0.0 || cross(e, sub(p, a)) / l >= -tol
    })
}

/// Distance from an interior point to the boundary of a convex CCW polygon.
pub fn interior_distance(poly_ccw: &[P2], p: P2) -> f64 {
    let n = poly_ccw.len();
    (0..n)
        .map(|i| {
            let a = poly_ccw[i];
            let b = poly_ccw[(i + 1) % n];
            let e = sub(b, a);
            cross(e, sub(p, a)) / len2(e)
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn segment_distance(p: P2, a: P2, b: P2) -> f64 {
    let ab = sub(b, a);
    let ap = sub(p, a);
    let l2 = dot2(ab, ab);
    if l2 == 0.0 {
        return len2(ap);
    }
    let t = (dot2(ap, ab) / l2).clamp(0.0, 1.0);
    len2([ap[0] - t * ab[0], ap[1] - t * ab[1]])
}

/// Inner parallel body `{x ∈ P : dist(x, ∂P) >= r}` of a convex CCW polygon.
pub fn inner_parallel(poly_ccw: &[P2], r: f64, subject: &[P2]) -> Vec<P2> {
    let mut out = subject.to_vec();
    let n = poly_ccw.len();
    for i in 0..n {
        if out.is_empty() {
            break;
        }
        let a = poly_ccw[i];
        let b = poly_ccw[(i + 1) % n];
        let e = sub(b, a);
        let l = len2(e);
        let normal = [-e[1] / l, e[0] / l];
        out = clip_halfplane(&out, normal, dot2(normal, a) + r);
    }
    out
}
