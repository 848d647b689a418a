//! Planar straight-line subdivision of a region of interest into sectors.
//!
//! The structure stores indexed vertices, endpoint-pair edges, and faces as
//! ordered vertex loops. Edges flagged `outer` form the region boundary; the
//! optimizer must leave the region boundary geometrically unchanged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{orient, segments_intersect, Point, Polygon, EPS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    #[serde(default)]
    pub outer: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Face {
    pub name: String,
    /// Counterclockwise vertex-id loop.
    pub ring: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarSubdivision {
    pub vertices: Vec<Point>,
    pub edges: Vec<Edge>,
    pub faces: Vec<Face>,
}

/// Structured description of an invariant violation.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    BadVertex { vertex: usize },
    BadEdge { edge: usize, reason: String },
    EdgeCrossing { first: usize, second: usize },
    BadFace { face: usize, reason: String },
    MissingEdge { face: usize, a: usize, b: usize },
    EdgeUsage { edge: usize, uses: usize, outer: bool },
    Coverage { face_total: f64, outer_area: f64 },
    OuterBoundary { reason: String },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::BadVertex { vertex } => write!(f, "vertex {vertex} has non-finite coordinates"),
            Violation::BadEdge { edge, reason } => write!(f, "edge {edge}: {reason}"),
            Violation::EdgeCrossing { first, second } => {
                write!(f, "edges {first} and {second} intersect away from shared endpoints")
            }
            Violation::BadFace { face, reason } => write!(f, "face {face}: {reason}"),
            Violation::MissingEdge { face, a, b } => {
                write!(f, "face {face} uses edge ({a},{b}) that is not in the edge list")
            }
            Violation::EdgeUsage { edge, uses, outer } => write!(
                f,
                "edge {edge} (outer={outer}) is used by {uses} faces, expected {}",
                if *outer { 1 } else { 2 }
            ),
            Violation::Coverage { face_total, outer_area } => write!(
                f,
                "face areas sum to {face_total} but outer boundary area is {outer_area}"
            ),
            Violation::OuterBoundary { reason } => write!(f, "outer boundary: {reason}"),
        }
    }
}

/// How a vertex may move under local adjustments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VertexClass {
    /// Not on the region boundary; free to move.
    Interior,
    /// Junction of an interior edge with a straight run of the region
    /// boundary; may slide along the line between the two boundary
    /// neighbors without changing the boundary geometry.
    BoundarySlide { prev: usize, next: usize },
    /// Region-boundary corner (or anything else on the boundary); immutable.
    Fixed,
}

impl PlanarSubdivision {
    pub fn face_polygon(&self, face: usize) -> Result<Polygon> {
        let ring = &self.faces[face].ring;
        Polygon::new(ring.iter().map(|&v| self.vertices[v]).collect())
    }

    /// Same ring as a raw point list, without validation.
    pub fn face_ring_points(&self, face: usize) -> Vec<Point> {
        self.faces[face].ring.iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn edge_length(&self, edge: usize) -> f64 {
        self.vertices[self.edges[edge].a].distance(&self.vertices[self.edges[edge].b])
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edges
            .iter()
            .position(|e| (e.a == a && e.b == b) || (e.a == b && e.b == a))
    }

    pub fn incident_edges(&self, v: usize) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&i| self.edges[i].a == v || self.edges[i].b == v)
            .collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incident_edges(v).len()
    }

    pub fn faces_with_vertex(&self, v: usize) -> Vec<usize> {
        (0..self.faces.len())
            .filter(|&f| self.faces[f].ring.contains(&v))
            .collect()
    }

    pub fn faces_with_edge(&self, a: usize, b: usize) -> Vec<usize> {
        (0..self.faces.len())
            .filter(|&f| {
                let ring = &self.faces[f].ring;
                let n = ring.len();
                (0..n).any(|i| {
                    let (p, q) = (ring[i], ring[(i + 1) % n]);
                    (p == a && q == b) || (p == b && q == a)
                })
            })
            .collect()
    }

    pub fn classify_vertex(&self, v: usize) -> VertexClass {
        let outer: Vec<&Edge> = self
            .edges
            .iter()
            .filter(|e| e.outer && (e.a == v || e.b == v))
            .collect();
        match outer.len() {
            0 => VertexClass::Interior,
            2 => {
                let other = |e: &Edge| if e.a == v { e.b } else { e.a };
                let (p, n) = (other(outer[0]), other(outer[1]));
                let collinear =
                    orient(self.vertices[p], self.vertices[v], self.vertices[n]).abs() <= EPS;
                if collinear {
                    VertexClass::BoundarySlide { prev: p, next: n }
                } else {
                    VertexClass::Fixed
                }
            }
            _ => VertexClass::Fixed,
        }
    }

    /// Traces the outer-flagged edges into a single counterclockwise polygon.
    pub fn outer_boundary(&self) -> Result<Polygon> {
        let outer: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter(|e| e.outer)
            .map(|e| (e.a, e.b))
            .collect();
        if outer.is_empty() {
            return Err(Error::InvalidGeometry("no outer edges".into()));
        }
        let mut adj: std::collections::HashMap<usize, Vec<usize>> = Default::default();
        for &(a, b) in &outer {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        for (v, ns) in &adj {
            if ns.len() != 2 {
                return Err(Error::InvalidGeometry(format!(
                    "outer boundary vertex {v} has degree {}",
                    ns.len()
                )));
            }
        }
        let start = outer[0].0;
        let mut ring = vec![start];
        let mut prev = start;
        let mut cur = adj[&start][0];
        while cur != start {
            ring.push(cur);
            let ns = &adj[&cur];
            let next = if ns[0] == prev { ns[1] } else { ns[0] };
            prev = cur;
            cur = next;
        }
        if ring.len() != adj.len() {
            return Err(Error::InvalidGeometry("outer edges form more than one cycle".into()));
        }
        let mut pts: Vec<Point> = ring.iter().map(|&v| self.vertices[v]).collect();
        let area: f64 = {
            let n = pts.len();
            (0..n).map(|i| crate::geometry::cross(pts[i], pts[(i + 1) % n])).sum::<f64>() / 2.0
        };
        if area < 0.0 {
            pts.reverse();
        }
        Polygon::new(pts)
    }

    /// Minimum Euclidean distance from p to any edge of the subdivision.
    pub fn point_to_boundary_distance(&self, p: Point) -> f64 {
        let mut best = f64::INFINITY;
        for e in &self.edges {
            best = best.min(crate::geometry::point_segment_distance(
                p,
                self.vertices[e.a],
                self.vertices[e.b],
            ));
        }
        best
    }

    /// Checks every structure invariant; violations are the return value.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (i, p) in self.vertices.iter().enumerate() {
            if !p.is_finite() {
                out.push(Violation::BadVertex { vertex: i });
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.a >= self.vertices.len() || e.b >= self.vertices.len() {
                out.push(Violation::BadEdge { edge: i, reason: "endpoint index out of range".into() });
                continue;
            }
            if e.a == e.b || self.vertices[e.a].distance(&self.vertices[e.b]) <= EPS {
                out.push(Violation::BadEdge { edge: i, reason: "degenerate edge".into() });
            }
        }
        // planarity: edges meet only at shared endpoints
        for i in 0..self.edges.len() {
            for j in (i + 1)..self.edges.len() {
                let (e, f) = (&self.edges[i], &self.edges[j]);
                if e.a >= self.vertices.len()
                    || e.b >= self.vertices.len()
                    || f.a >= self.vertices.len()
                    || f.b >= self.vertices.len()
                {
                    continue;
                }
                if segments_intersect(
                    self.vertices[e.a],
                    self.vertices[e.b],
                    self.vertices[f.a],
                    self.vertices[f.b],
                ) {
                    out.push(Violation::EdgeCrossing { first: i, second: j });
                }
            }
        }
        let mut usage = vec![0usize; self.edges.len()];
        let mut face_total = 0.0;
        for (fi, face) in self.faces.iter().enumerate() {
            if face.ring.iter().any(|&v| v >= self.vertices.len()) {
                out.push(Violation::BadFace { face: fi, reason: "vertex index out of range".into() });
                continue;
            }
            match self.face_polygon(fi) {
                Ok(poly) => face_total += poly.signed_area(),
                Err(e) => {
                    out.push(Violation::BadFace { face: fi, reason: e.to_string() });
                    continue;
                }
            }
            let n = face.ring.len();
            for i in 0..n {
                let (a, b) = (face.ring[i], face.ring[(i + 1) % n]);
                match self.edge_index(a, b) {
                    Some(ei) => usage[ei] += 1,
                    None => out.push(Violation::MissingEdge { face: fi, a, b }),
                }
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            let expected = if e.outer { 1 } else { 2 };
            if usage[i] != expected {
                out.push(Violation::EdgeUsage { edge: i, uses: usage[i], outer: e.outer });
            }
        }
        match self.outer_boundary() {
            Ok(outer) => {
                let outer_area = outer.signed_area();
                if (face_total - outer_area).abs() > 1e-9 * outer_area.abs().max(1.0) {
                    out.push(Violation::Coverage { face_total, outer_area });
                }
            }
            Err(e) => out.push(Violation::OuterBoundary { reason: e.to_string() }),
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSubdivision(v))
        }
    }
}

/// Assembles a subdivision from face polygons that tile a region.
///
/// Vertices shared between faces must be bit-identical points. Edges used by
/// exactly one face are flagged as the outer boundary.
pub fn from_face_polygons(polys: &[(String, Vec<Point>)]) -> Result<PlanarSubdivision> {
    let mut vid: std::collections::HashMap<(u64, u64), usize> = Default::default();
    let mut vertices: Vec<Point> = Vec::new();
    let mut key = |p: Point, vertices: &mut Vec<Point>| -> usize {
        let k = (p.x.to_bits(), p.y.to_bits());
        *vid.entry(k).or_insert_with(|| {
            vertices.push(p);
            vertices.len() - 1
        })
    };
    let mut eid: std::collections::HashMap<(usize, usize), usize> = Default::default();
    let mut edges: Vec<Edge> = Vec::new();
    let mut uses: Vec<usize> = Vec::new();
    let mut faces = Vec::new();
    for (name, ring) in polys {
        let ids: Vec<usize> = ring.iter().map(|&p| key(p, &mut vertices)).collect();
        let n = ids.len();
        for i in 0..n {
            let (a, b) = (ids[i], ids[(i + 1) % n]);
            let k = (a.min(b), a.max(b));
            let ei = *eid.entry(k).or_insert_with(|| {
                edges.push(Edge { a: k.0, b: k.1, outer: false });
                uses.push(0);
                edges.len() - 1
            });
            uses[ei] += 1;
        }
        faces.push(Face { name: name.clone(), ring: ids });
    }
    for (i, e) in edges.iter_mut().enumerate() {
        e.outer = uses[i] == 1;
    }
    let sub = PlanarSubdivision { vertices, edges, faces };
    sub.ensure_valid()?;
    Ok(sub)
}

/// Square region split into two rectangles by a vertical cut at `x`.
/// Shared test fixture; also the seed of the balance experiments.
pub fn two_rectangles(side: f64, x: f64) -> PlanarSubdivision {
    let p = Point::new;
    from_face_polygons(&[
        (
            "west".into(),
            vec![p(0.0, 0.0), p(x, 0.0), p(x, side), p(0.0, side)],
        ),
        (
            "east".into(),
            vec![p(x, 0.0), p(side, 0.0), p(side, side), p(x, side)],
        ),
    ])
    .expect("two-rectangle fixture is valid")
}
