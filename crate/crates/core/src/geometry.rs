//! Planar geometry in slice millimetre coordinates.
//!
//! Hulls are built with Andrew's monotone chain and measured with rotating
//! calipers. All orderings are lexicographic on `(x, y)` so results do not
//! depend on input order.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

/// Cross products with magnitude at or below this (relative to the edge
/// lengths involved) count as collinear when pruning hull vertices.
const COLLINEAR_EPS: f64 = 1e-12;
const ISOTROPY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    #[inline]
    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn dist2(self, other: Point2) -> f64 {
        let d = self - other;
        d.dot(d)
    }

    #[inline]
    pub fn dist(self, other: Point2) -> f64 {
        libm::sqrt(self.dist2(other))
    }

    /// Lexicographic total order on `(x, y)`.
    #[inline]
    pub fn lex_cmp(&self, other: &Point2) -> Ordering {
        self.x.total_cmp(&other.x).then(self.y.total_cmp(&other.y))
    }
}

impl core::ops::Sub for Point2 {
    type Output = Point2;

    #[inline]
    fn sub(self, other: Point2) -> Point2 {
        Point2::new(self.x - other.x, self.y - other.y)
    }
}

/// Twice the signed area of triangle `(o, a, b)`; positive for a left turn.
#[inline]
pub fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryError {
    EmptyInput,
    DegenerateInterface,
    IsotropicInterface,
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::EmptyInput => f.write_str("no input points"),
            GeometryError::DegenerateInterface => f.write_str("fewer than two distinct interface points"),
            GeometryError::IsotropicInterface => f.write_str("interface points have no dominant direction"),
        }
    }
}

impl core::error::Error for GeometryError {}

/// A line segment with its cached Euclidean length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment2D {
    pub p: Point2,
    pub q: Point2,
    pub length_mm: f64,
}

impl Segment2D {
    pub fn new(p: Point2, q: Point2) -> Self {
        Segment2D { p, q, length_mm: p.dist(q) }
    }
}

/// Unit direction with a canonical sign: `dx > 0`, or `dx == 0` and `dy > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitDir2D {
    dx: f64,
    dy: f64,
}

impl UnitDir2D {
    /// Normalises `(dx, dy)` and flips it into canonical sign. Returns `None`
    /// for the zero or non-finite vector.
    pub fn new(dx: f64, dy: f64) -> Option<Self> {
        let norm = libm::hypot(dx, dy);
        if !norm.is_finite() || norm == 0.0 {
            return None;
        }
        let (mut dx, mut dy) = (dx / norm, dy / norm);
        if dx < 0.0 || (dx == 0.0 && dy < 0.0) {
            dx = -dx;
            dy = -dy;
        }
        // normalise signed zero so equal directions compare and print equal
        Some(UnitDir2D { dx: dx + 0.0, dy: dy + 0.0 })
    }

    pub const X: UnitDir2D = UnitDir2D { dx: 1.0, dy: 0.0 };
    pub const Y: UnitDir2D = UnitDir2D { dx: 0.0, dy: 1.0 };

    #[inline]
    pub fn dx(self) -> f64 {
        self.dx
    }

    #[inline]
    pub fn dy(self) -> f64 {
        self.dy
    }

    #[inline]
    pub fn as_point(self) -> Point2 {
        Point2::new(self.dx, self.dy)
    }
}

/// Convex polygon, counter-clockwise from the lexicographically smallest
/// vertex, with collinear vertices removed. One vertex is a point and two
/// vertices a segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Hull {
    vertices: Vec<Point2>,
}

impl Hull {
    #[inline]
    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    /// Twice the signed area (shoelace).
    pub fn signed_area2(&self) -> f64 {
        let v = &self.vertices;
        let n = v.len();
        (0..n)
            .map(|i| {
                let (a, b) = (v[i], v[(i + 1) % n]);
                a.x * b.y - b.x * a.y
            })
            .sum()
    }
}

fn is_collinear_or_right(o: Point2, a: Point2, b: Point2) -> bool {
    let c = cross(o, a, b);
    if c <= 0.0 {
        return true;
    }
    let scale = libm::sqrt(a.dist2(o) * b.dist2(o));
    c <= COLLINEAR_EPS * scale
}

/// Andrew's monotone chain hull.
pub fn convex_hull(points: &[Point2]) -> Result<Hull, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(Point2::lex_cmp);
    pts.dedup_by(|a, b| a.lex_cmp(b) == Ordering::Equal);
    if pts.len() < 3 {
        return Ok(Hull { vertices: pts });
    }

    let mut lower: Vec<Point2> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && is_collinear_or_right(lower[lower.len() - 2], lower[lower.len() - 1], p) {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point2> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && is_collinear_or_right(upper[upper.len() - 2], upper[upper.len() - 1], p) {
            upper.pop();
        }
        upper.push(p);
    }
    // each chain ends where the other starts
    lower.pop();
    upper.pop();
    lower.extend(upper);
    Ok(Hull { vertices: lower })
}

/// Orders a pair so that `p <= q` lexicographically.
fn ordered(a: Point2, b: Point2) -> (Point2, Point2) {
    if b.lex_cmp(&a) == Ordering::Less {
        (b, a)
    } else {
        (a, b)
    }
}

struct Best {
    d2: f64,
    p: Point2,
    q: Point2,
}

impl Best {
    fn offer(&mut self, a: Point2, b: Point2) {
        let d2 = a.dist2(b);
        let (p, q) = ordered(a, b);
        let better = match d2.total_cmp(&self.d2) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => p.lex_cmp(&self.p).then(q.lex_cmp(&self.q)) == Ordering::Less,
        };
        if better {
            *self = Best { d2, p, q };
        }
    }
}

/// Rotating-calipers diameter of a hull: the farthest antipodal vertex pair.
///
/// Ties go to the lexicographically smallest `(p, q)` with `p <= q`.
pub fn max_diameter(hull: &Hull) -> Segment2D {
    let v = hull.vertices();
    match v.len() {
        0 => return Segment2D::new(Point2::default(), Point2::default()),
        1 => return Segment2D::new(v[0], v[0]),
        2 => {
            let (p, q) = ordered(v[0], v[1]);
            return Segment2D::new(p, q);
        }
        _ => {}
    }
    let n = v.len();
    let mut best = Best { d2: -1.0, p: v[0], q: v[0] };
    let mut j = 1;
    for i in 0..n {
        let ni = (i + 1) % n;
        // advance the opposite caliper while the triangle on edge (i, ni) grows
        for _ in 0..n {
            let nj = (j + 1) % n;
            if cross(v[i], v[ni], v[nj]) > cross(v[i], v[ni], v[j]) {
                j = nj;
            } else {
                break;
            }
        }
        // the next opposite vertex is antipodal too when the edges are
        // (nearly) parallel; offering it unconditionally is harmless
        let nj = (j + 1) % n;
        best.offer(v[i], v[j]);
        best.offer(v[ni], v[j]);
        best.offer(v[i], v[nj]);
        best.offer(v[ni], v[nj]);
    }
    Segment2D::new(best.p, best.q)
}

fn pick_extreme(current: &mut (f64, Point2), value: f64, point: Point2, want_max: bool) {
    let ord = value.total_cmp(&current.0);
    let better = match (ord, want_max) {
        (Ordering::Greater, true) | (Ordering::Less, false) => true,
        (Ordering::Equal, _) => point.lex_cmp(&current.1) == Ordering::Less,
        _ => false,
    };
    if better {
        *current = (value, point);
    }
}

/// Width of the hull measured along `dir`: max minus min of the vertex
/// projections. The realising segment joins the extreme vertices, from the
/// argmin end (`p`) to the argmax end (`q`).
pub fn directional_extent(hull: &Hull, dir: UnitDir2D) -> (f64, Segment2D) {
    let v = hull.vertices();
    let Some(&first) = v.first() else {
        return (0.0, Segment2D::new(Point2::default(), Point2::default()));
    };
    let d = dir.as_point();
    let start = first.dot(d);
    let mut lo = (start, first);
    let mut hi = (start, first);
    for &p in &v[1..] {
        let t = p.dot(d);
        pick_extreme(&mut lo, t, p, false);
        pick_extreme(&mut hi, t, p, true);
    }
    (hi.0 - lo.0, Segment2D::new(lo.1, hi.1))
}

/// Principal direction of a point cloud from its 2x2 covariance.
pub fn fit_line_direction(points: &[Point2]) -> Result<UnitDir2D, GeometryError> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(Point2::lex_cmp);
    pts.dedup_by(|a, b| a.lex_cmp(b) == Ordering::Equal);
    match pts.len() {
        0 | 1 => return Err(GeometryError::DegenerateInterface),
        2 => {
            let d = pts[1] - pts[0];
            return UnitDir2D::new(d.x, d.y).ok_or(GeometryError::DegenerateInterface);
        }
        _ => {}
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    let (mx, my) = (sx / n, sy / n);
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for p in &pts {
        let (dx, dy) = (p.x - mx, p.y - my);
        a += dx * dx;
        b += dx * dy;
        c += dy * dy;
    }
    a /= n;
    b /= n;
    c /= n;

    let half_diff = 0.5 * (a - c);
    let root = libm::hypot(half_diff, b);
    let mean = 0.5 * (a + c);
    let (l1, l2) = (mean + root, mean - root);
    if l1 - l2 <= ISOTROPY_EPS * l1.abs().max(l2.abs()) {
        return Err(GeometryError::IsotropicInterface);
    }
    // two algebraically equivalent eigenvectors; take the better conditioned
    let e1 = (b, l1 - a);
    let e2 = (l1 - c, b);
    let norm1 = e1.0 * e1.0 + e1.1 * e1.1;
    let norm2 = e2.0 * e2.0 + e2.1 * e2.1;
    let (dx, dy) = if norm1 >= norm2 { e1 } else { e2 };
    UnitDir2D::new(dx, dy).ok_or(GeometryError::IsotropicInterface)
}

/// Rotates by 90 degrees and restores the canonical sign.
pub fn perpendicular(dir: UnitDir2D) -> UnitDir2D {
    UnitDir2D::new(-dir.dy(), dir.dx()).unwrap_or(UnitDir2D::X)
}
