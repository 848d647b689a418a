//! Planar geometry kernel in longitude/latitude degree units.
//!
//! All coordinates are treated as planar Euclidean; no great-circle
//! correction is applied.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coincidence tolerance for geometric predicates, in degrees.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

pub fn cross(a: Point, b: Point) -> f64 {
    a.x * b.y - a.y * b.x
}

pub fn dot(a: Point, b: Point) -> f64 {
    a.x * b.x + a.y * b.y
}

/// Twice the signed area of triangle (a, b, c); positive when c is left of a->b.
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    cross(b - a, c - a)
}

/// A simple polygon in counterclockwise orientation, closed implicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    /// Validates simplicity, orientation and non-degeneracy.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidGeometry(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        for p in &vertices {
            if !p.is_finite() {
                return Err(Error::InvalidGeometry("non-finite coordinate".into()));
            }
        }
        let n = vertices.len();
        for i in 0..n {
            if vertices[i].distance(&vertices[(i + 1) % n]) <= EPS {
                return Err(Error::InvalidGeometry(format!(
                    "consecutive vertices {i} and {} coincide",
                    (i + 1) % n
                )));
            }
        }
        let poly = Polygon { vertices };
        let area = poly.signed_area();
        if area.abs() <= EPS {
            return Err(Error::InvalidGeometry("zero polygon area".into()));
        }
        if area < 0.0 {
            return Err(Error::InvalidGeometry(
                "polygon is clockwise; counterclockwise orientation required".into(),
            ));
        }
        if !poly.is_simple() {
            return Err(Error::InvalidGeometry("polygon boundary self-intersects".into()));
        }
        Ok(poly)
    }

    /// Builds without the simplicity scan; used where the caller has already
    /// validated or will validate the ring.
    pub fn new_unchecked(vertices: Vec<Point>) -> Self {
        Polygon { vertices }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edge i runs from vertex i to vertex i+1 (mod n).
    pub fn edge(&self, i: usize) -> (Point, Point) {
        let n = self.vertices.len();
        (self.vertices[i], self.vertices[(i + 1) % n])
    }

    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        let mut sum = 0.0;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            sum += cross(a, b);
        }
        sum / 2.0
    }

    pub fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        for i in 0..n {
            let (a, b) = self.edge(i);
            for j in (i + 1)..n {
                // skip adjacent edges, which share an endpoint by construction
                if j == i || (j + 1) % n == i || (i + 1) % n == j {
                    continue;
                }
                let (c, d) = self.edge(j);
                if segments_intersect(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }

    pub fn centroid(&self) -> Point {
        let n = self.vertices.len();
        let mut cx = 0.0;
        let mut cy = 0.0;
        let mut a = 0.0;
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            let w = cross(p, q);
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
            a += w;
        }
        Point::new(cx / (3.0 * a), cy / (3.0 * a))
    }

    pub fn bounds(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.vertices {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    /// Point containment for a closed polygon: boundary points count as inside.
    pub fn contains(&self, p: Point) -> bool {
        if self.boundary_distance(p) <= EPS {
            return true;
        }
        let n = self.vertices.len();
        let mut inside = false;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            if (a.y > p.y) != (b.y > p.y) {
                let xi = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < xi {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Minimum distance from p to the polygon boundary.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        let n = self.vertices.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            let (a, b) = self.edge(i);
            best = best.min(point_segment_distance(p, a, b));
        }
        best
    }
}

/// Positive shoelace area of a valid polygon.
pub fn polygon_area(poly: &Polygon) -> f64 {
    poly.signed_area()
}

/// Convex hull of a point set (Andrew's monotone chain), counterclockwise.
pub fn convex_hull(points: &[Point]) -> Result<Polygon> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap().then(a.y.partial_cmp(&b.y).unwrap()));
    pts.dedup_by(|a, b| a.distance(b) <= EPS);
    if pts.len() < 3 {
        return Err(Error::InvalidGeometry("hull of fewer than 3 distinct points".into()));
    }
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && orient(lower[lower.len() - 2], lower[lower.len() - 1], p) <= EPS {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && orient(upper[upper.len() - 2], upper[upper.len() - 1], p) <= EPS {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    Polygon::new(lower)
}

/// Ratio of polygon area to convex hull area, in (0, 1]; 1 iff convex.
pub fn convexity_ratio(poly: &Polygon) -> Result<f64> {
    let hull = convex_hull(poly.vertices())?;
    Ok(polygon_area(poly) / polygon_area(&hull))
}

/// Interior angle at every vertex, in degrees; reflex vertices exceed 180.
pub fn interior_angles(poly: &Polygon) -> Result<Vec<f64>> {
    let n = poly.len();
    let vs = poly.vertices();
    let mut angles = Vec::with_capacity(n);
    for i in 0..n {
        let prev = vs[(i + n - 1) % n];
        let v = vs[i];
        let next = vs[(i + 1) % n];
        let incoming = v - prev;
        let outgoing = next - v;
        if incoming.distance(&Point::new(0.0, 0.0)) <= EPS
            || outgoing.distance(&Point::new(0.0, 0.0)) <= EPS
        {
            return Err(Error::InvalidGeometry(format!("degenerate vertex {i}")));
        }
        // interior = 180 - signed turn angle, for a CCW polygon
        let turn = cross(incoming, outgoing).atan2(dot(incoming, outgoing));
        angles.push(180.0 - turn.to_degrees());
    }
    Ok(angles)
}

/// A boundary crossing of a segment with a polygon edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    /// Parameter along the query segment, in [0, 1].
    pub t: f64,
    pub edge: usize,
    /// Acute angle between segment and crossed edge, degrees in (0, 90].
    pub angle_deg: f64,
}

/// Crossings of segment a->b with the polygon boundary, ordered by t.
///
/// Collinear overlap with an edge is a grazing contact and is surfaced as an
/// error; the caller perturbs and retries.
pub fn segment_polygon_crossings(a: Point, b: Point, poly: &Polygon) -> Result<Vec<Crossing>> {
    let d = b - a;
    let seg_len = a.distance(&b);
    if seg_len <= EPS {
        return Err(Error::InvalidGeometry("degenerate query segment".into()));
    }
    let mut out: Vec<Crossing> = Vec::new();
    for i in 0..poly.len() {
        let (p, q) = poly.edge(i);
        let e = q - p;
        let denom = cross(d, e);
        if denom.abs() <= EPS * seg_len * p.distance(&q) {
            // parallel; grazing only if collinear and overlapping
            if orient(a, b, p).abs() <= EPS * seg_len && segments_overlap_1d(a, b, p, q) {
                return Err(Error::GrazingContact { edge: i });
            }
            continue;
        }
        let t = cross(p - a, e) / denom;
        let u = cross(p - a, d) / denom;
        if (-EPS..=1.0 + EPS).contains(&t) && (-EPS..=1.0 + EPS).contains(&u) {
            let cosv = (dot(d, e) / (seg_len * p.distance(&q))).clamp(-1.0, 1.0);
            let mut angle = cosv.acos().to_degrees();
            if angle > 90.0 {
                angle = 180.0 - angle;
            }
            out.push(Crossing { t: t.clamp(0.0, 1.0), edge: i, angle_deg: angle });
        }
    }
    out.sort_by(|x, y| x.t.partial_cmp(&y.t).unwrap());
    // a crossing through a shared edge endpoint registers on both edges
    out.dedup_by(|x, y| (x.t - y.t).abs() <= EPS);
    Ok(out)
}

fn segments_overlap_1d(a: Point, b: Point, p: Point, q: Point) -> bool {
    let d = b - a;
    let len2 = dot(d, d);
    let tp = dot(p - a, d) / len2;
    let tq = dot(q - a, d) / len2;
    let (lo, hi) = if tp < tq { (tp, tq) } else { (tq, tp) };
    hi >= -EPS && lo <= 1.0 + EPS
}

/// Proper or touching intersection of two segments, excluding shared endpoints.
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > EPS && d2 < -EPS) || (d1 < -EPS && d2 > EPS))
        && ((d3 > EPS && d4 < -EPS) || (d3 < -EPS && d4 > EPS))
    {
        return true;
    }
    let on = |o: f64, p: Point, a: Point, b: Point| {
        o.abs() <= EPS
            && p.x >= a.x.min(b.x) - EPS
            && p.x <= a.x.max(b.x) + EPS
            && p.y >= a.y.min(b.y) - EPS
            && p.y <= a.y.max(b.y) + EPS
    };
    let shared = |p: Point, q: Point| p.distance(&q) <= EPS;
    // endpoint contact counts only when it is not a shared endpoint
    if on(d1, a, c, d) && !shared(a, c) && !shared(a, d) {
        return true;
    }
    if on(d2, b, c, d) && !shared(b, c) && !shared(b, d) {
        return true;
    }
    if on(d3, c, a, b) && !shared(c, a) && !shared(c, b) {
        return true;
    }
    if on(d4, d, a, b) && !shared(d, a) && !shared(d, b) {
        return true;
    }
    false
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = dot(ab, ab);
    if len2 <= EPS * EPS {
        return p.distance(&a);
    }
    let t = (dot(p - a, ab) / len2).clamp(0.0, 1.0);
    p.distance(&(a + ab * t))
}

pub fn segment_segment_distance(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// Clips a polygon ring against the half-plane dot(p, normal) <= offset.
/// Returns the surviving ring (possibly with fewer than 3 vertices).
pub fn clip_halfplane(ring: &[Point], normal: Point, offset: f64) -> Vec<Point> {
    let mut out = Vec::with_capacity(ring.len() + 2);
    let n = ring.len();
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        let sa = dot(a, normal) - offset;
        let sb = dot(b, normal) - offset;
        if sa <= EPS {
            out.push(a);
        }
        if (sa > EPS && sb < -EPS) || (sa < -EPS && sb > EPS) {
            let t = sa / (sa - sb);
            out.push(a + (b - a) * t);
        }
    }
    out.dedup_by(|a, b| a.distance(b) <= EPS);
    if out.len() > 1 && out[0].distance(out.last().unwrap()) <= EPS {
        out.pop();
    }
    out
}
