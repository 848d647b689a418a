//! Lane-count estimation through a sector along a dominant flow.
//!
//! The continuous bottleneck-width problem is discretized as a shortest path
//! in a clearance graph between the two banks of the sector boundary, with
//! weather obstacles as intermediate nodes. Lanes quantize per free gap: a
//! gap narrower than the lane width contributes nothing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    clip_halfplane, convexity_ratio, cross, dot, segment_polygon_crossings,
    segment_segment_distance, Point, Polygon, EPS,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherObstacle {
    pub polygon: Polygon,
    /// Active interval in seconds; absent means the whole horizon.
    #[serde(default)]
    pub active: Option<(f64, f64)>,
}

impl WeatherObstacle {
    pub fn active_during(&self, horizon: (f64, f64)) -> bool {
        match self.active {
            None => true,
            Some((a, b)) => a < horizon.1 && b > horizon.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CutNode {
    LeftBank(Vec<Point>),
    RightBank(Vec<Point>),
    Obstacle(Vec<Point>),
}

impl CutNode {
    fn points(&self) -> &[Point] {
        match self {
            CutNode::LeftBank(p) | CutNode::RightBank(p) | CutNode::Obstacle(p) => p,
        }
    }

    fn closed(&self) -> bool {
        matches!(self, CutNode::Obstacle(_))
    }
}

/// Clearance graph between the two boundary banks and the obstacles.
/// Node 0 is the left bank, node 1 the right bank.
#[derive(Debug, Clone)]
pub struct CutGraph {
    pub nodes: Vec<CutNode>,
    /// (node, node, clearance in degrees); complete over node pairs.
    pub edges: Vec<(usize, usize, f64)>,
}

impl CutGraph {
    pub fn clearance(&self, a: usize, b: usize) -> f64 {
        self.edges
            .iter()
            .find(|&&(x, y, _)| (x == a && y == b) || (x == b && y == a))
            .map(|&(_, _, w)| w)
            .unwrap_or(f64::INFINITY)
    }
}

/// Where a flow polyline traverses a sector: the chord between the first and
/// last boundary intersection of the flow's mean direction line.
#[derive(Debug, Clone, Copy)]
pub struct FlowChord {
    pub entry: Point,
    pub exit: Point,
    pub direction: Point,
}

/// Mean-direction traversal chord of `flow` across `sector`, or None when
/// the flow does not intersect the sector.
pub fn flow_chord(sector: &Polygon, flow: &[Point]) -> Option<FlowChord> {
    if flow.len() < 2 {
        return None;
    }
    let touches = flow.iter().any(|&p| sector.contains(p))
        || flow.windows(2).any(|w| {
            crossings_perturbed(w[0], w[1], sector).map(|c| !c.is_empty()).unwrap_or(false)
        });
    if !touches {
        return None;
    }
    // mean direction: chord of the polyline, falling back to first segment
    let mut dir = *flow.last().unwrap() - flow[0];
    if dir.distance(&Point::new(0.0, 0.0)) <= EPS {
        dir = flow[1] - flow[0];
    }
    let len = dir.distance(&Point::new(0.0, 0.0));
    let dir = Point::new(dir.x / len, dir.y / len);
    // anchor the direction line at a point of the flow inside (or nearest) the sector
    let anchor = flow
        .iter()
        .copied()
        .find(|&p| sector.contains(p))
        .unwrap_or_else(|| midpoint_inside(sector, flow));
    let reach = {
        let (lo, hi) = sector.bounds();
        4.0 * lo.distance(&hi).max(1.0)
    };
    let a = anchor + dir * -reach;
    let b = anchor + dir * reach;
    let cr = crossings_perturbed(a, b, sector).ok()?;
    if cr.len() < 2 {
        return None;
    }
    let at = |t: f64| a + (b - a) * t;
    Some(FlowChord { entry: at(cr[0].t), exit: at(cr[cr.len() - 1].t), direction: dir })
}

fn midpoint_inside(sector: &Polygon, flow: &[Point]) -> Point {
    for w in flow.windows(2) {
        if let Ok(cr) = crossings_perturbed(w[0], w[1], sector) {
            if cr.len() >= 2 {
                let t = (cr[0].t + cr[1].t) / 2.0;
                return w[0] + (w[1] - w[0]) * t;
            }
            if cr.len() == 1 {
                // entering or leaving across this segment; take the inside half
                let t_in = if sector.contains(w[1]) { (cr[0].t + 1.0) / 2.0 } else { cr[0].t / 2.0 };
                return w[0] + (w[1] - w[0]) * t_in;
            }
        }
    }
    sector.centroid()
}

fn crossings_perturbed(
    a: Point,
    b: Point,
    poly: &Polygon,
) -> Result<Vec<crate::geometry::Crossing>> {
    match segment_polygon_crossings(a, b, poly) {
        Err(Error::GrazingContact { .. }) => {
            let d = Point::new(1e-7, 1e-7);
            segment_polygon_crossings(a + d, b + d, poly)
        }
        other => other,
    }
}

/// Total inside cross-section length of the sector along the perpendicular to
/// `dir` through point `c`.
fn cross_width_at(sector: &Polygon, dir: Point, c: Point) -> f64 {
    let perp = Point::new(-dir.y, dir.x);
    let (lo, hi) = sector.bounds();
    let reach = 2.0 * lo.distance(&hi).max(1.0);
    let a = c + perp * -reach;
    let b = c + perp * reach;
    let cr = match crossings_perturbed(a, b, sector) {
        Ok(c) => c,
        Err(_) => return 0.0,
    };
    let mut cuts = vec![0.0];
    cuts.extend(cr.iter().map(|x| x.t));
    cuts.push(1.0);
    let seg_len = a.distance(&b);
    let mut width = 0.0;
    for w in cuts.windows(2) {
        let mid = (w[0] + w[1]) / 2.0;
        if sector.contains(a + (b - a) * mid) {
            width += (w[1] - w[0]) * seg_len;
        }
    }
    width
}

/// Minimum perpendicular cross-width of the sector sampled along the chord.
pub fn min_cross_width(sector: &Polygon, chord: &FlowChord) -> f64 {
    let n = 65;
    let mut best = f64::INFINITY;
    for i in 0..n {
        let t = 0.001 + (0.998 * i as f64) / (n - 1) as f64;
        let c = chord.entry + (chord.exit - chord.entry) * t;
        best = best.min(cross_width_at(sector, chord.direction, c));
    }
    best
}

fn min_distance(a: &CutNode, b: &CutNode) -> f64 {
    let pa = a.points();
    let pb = b.points();
    let seg_count = |pts: &[Point], closed: bool| if closed { pts.len() } else { pts.len() - 1 };
    let mut best = f64::INFINITY;
    for i in 0..seg_count(pa, a.closed()) {
        let (a1, a2) = (pa[i], pa[(i + 1) % pa.len()]);
        for j in 0..seg_count(pb, b.closed()) {
            let (b1, b2) = (pb[j], pb[(j + 1) % pb.len()]);
            best = best.min(segment_segment_distance(a1, a2, b1, b2));
        }
    }
    best
}

/// Clips an obstacle to the sector. Convex sectors get exact half-plane
/// clipping; for non-convex sectors the unclipped obstacle is used when it
/// intersects the sector at all (clearances only shrink, so the lane count is
/// conservative).
fn clip_obstacle(sector: &Polygon, obstacle: &Polygon) -> Option<Vec<Point>> {
    let convex = convexity_ratio(sector).map(|c| c >= 1.0 - 1e-9).unwrap_or(false);
    if convex {
        let mut ring: Vec<Point> = obstacle.vertices().to_vec();
        for i in 0..sector.len() {
            let (a, b) = sector.edge(i);
            let d = b - a;
            let outward = Point::new(d.y, -d.x);
            ring = clip_halfplane(&ring, outward, dot(a, outward));
            if ring.len() < 3 {
                return None;
            }
        }
        Some(ring)
    } else {
        let intersects = obstacle.vertices().iter().any(|&p| sector.contains(p))
            || sector.vertices().iter().any(|&p| obstacle.contains(p))
            || (0..obstacle.len()).any(|i| {
                let (a, b) = obstacle.edge(i);
                crossings_perturbed(a, b, sector).map(|c| !c.is_empty()).unwrap_or(true)
            });
        if intersects {
            Some(obstacle.vertices().to_vec())
        } else {
            None
        }
    }
}

/// Builds the clearance graph for a sector, a unit flow direction, and the
/// obstacles already clipped to the sector.
pub fn build_cut_graph(sector: &Polygon, chord: &FlowChord, obstacles: &[Vec<Point>]) -> CutGraph {
    let (left, right) = split_banks(sector, chord);
    let mut nodes = vec![CutNode::LeftBank(left), CutNode::RightBank(right)];
    for obs in obstacles {
        nodes.push(CutNode::Obstacle(obs.clone()));
    }
    let mut edges = Vec::new();
    for i in 0..nodes.len() {
        for j in (i + 1)..nodes.len() {
            let w = if i == 0 && j == 1 {
                // banks meet at the chord endpoints; their separation along
                // the flow is the perpendicular cross-width, not raw distance
                min_cross_width(sector, chord)
            } else {
                min_distance(&nodes[i], &nodes[j])
            };
            edges.push((i, j, w));
        }
    }
    CutGraph { nodes, edges }
}

/// Splits the sector boundary at the chord's entry and exit into the left and
/// right banks relative to the flow direction.
fn split_banks(sector: &Polygon, chord: &FlowChord) -> (Vec<Point>, Vec<Point>) {
    // augmented ring with entry/exit inserted on their edges
    let n = sector.len();
    let mut ring: Vec<Point> = Vec::with_capacity(n + 2);
    for i in 0..n {
        let (a, b) = sector.edge(i);
        ring.push(a);
        let mut on_edge: Vec<(f64, Point)> = Vec::new();
        for &p in &[chord.entry, chord.exit] {
            if crate::geometry::point_segment_distance(p, a, b) <= 1e-7 {
                let ab = b - a;
                let t = dot(p - a, ab) / dot(ab, ab);
                if t > 1e-9 && t < 1.0 - 1e-9 {
                    on_edge.push((t, p));
                }
            }
        }
        on_edge.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        for (_, p) in on_edge {
            ring.push(p);
        }
    }
    let find = |target: Point| {
        ring.iter()
            .enumerate()
            .min_by(|a, b| {
                a.1.distance(&target).partial_cmp(&b.1.distance(&target)).unwrap()
            })
            .map(|(i, _)| i)
            .unwrap()
    };
    let ei = find(chord.entry);
    let xi = find(chord.exit);
    let m = ring.len();
    let chain = |from: usize, to: usize| {
        let mut pts = Vec::new();
        let mut i = from;
        loop {
            pts.push(ring[i]);
            if i == to {
                break;
            }
            i = (i + 1) % m;
        }
        pts
    };
    let c1 = chain(ei, xi);
    let c2 = chain(xi, ei);
    // classify by which side of the flow line each chain lies on
    let side = |pts: &[Point]| -> f64 {
        pts.iter().map(|&p| cross(chord.direction, p - chord.entry)).sum::<f64>()
            / pts.len() as f64
    };
    if side(&c1) >= side(&c2) {
        (c1, c2)
    } else {
        (c2, c1)
    }
}

fn lanes_of_gap(width: f64, lane_width: f64) -> u64 {
    (width / lane_width + 1e-9).floor().max(0.0) as u64
}

/// Minimum over bank-to-bank paths of the per-gap lane sum.
fn min_lane_path(graph: &CutGraph, lane_width: f64) -> u64 {
    let n = graph.nodes.len();
    let mut dist = vec![u64::MAX; n];
    let mut done = vec![false; n];
    dist[0] = 0;
    for _ in 0..n {
        let u = match (0..n).filter(|&i| !done[i]).min_by_key(|&i| dist[i]) {
            Some(u) if dist[u] < u64::MAX => u,
            _ => break,
        };
        done[u] = true;
        for &(a, b, w) in &graph.edges {
            let v = if a == u { b } else if b == u { a } else { continue };
            let lanes = lanes_of_gap(w, lane_width);
            if dist[u].saturating_add(lanes) < dist[v] {
                dist[v] = dist[u] + lanes;
            }
        }
    }
    dist[1]
}

/// Number of traffic lanes the sector admits along the flow, or None when the
/// flow does not intersect the sector.
pub fn lane_count(
    sector: &Polygon,
    flow: &[Point],
    obstacles: &[WeatherObstacle],
    lane_width: f64,
    horizon: (f64, f64),
) -> Result<Option<u64>> {
    if lane_width <= 0.0 {
        return Err(Error::InvalidInput("lane width must be positive".into()));
    }
    let chord = match flow_chord(sector, flow) {
        Some(c) => c,
        None => return Ok(None),
    };
    let clipped: Vec<Vec<Point>> = obstacles
        .iter()
        .filter(|o| o.active_during(horizon))
        .filter_map(|o| clip_obstacle(sector, &o.polygon))
        .collect();
    let graph = build_cut_graph(sector, &chord, &clipped);
    Ok(Some(min_lane_path(&graph, lane_width)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(w: f64, h: f64) -> Polygon {
        Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(w, 0.0),
            Point::new(w, h),
            Point::new(0.0, h),
        ])
        .unwrap()
    }

    fn axis_flow() -> Vec<Point> {
        vec![Point::new(-0.5, 0.25), Point::new(1.5, 0.25)]
    }

    #[test]
    fn empty_rectangle_five_lanes() {
        let n = lane_count(&rect(1.0, 0.5), &axis_flow(), &[], 0.1, (0.0, 1.0)).unwrap();
        assert_eq!(n, Some(5));
    }

    #[test]
    fn cut_graph_no_obstacles() {
        let sector = rect(1.0, 0.5);
        let chord = flow_chord(&sector, &axis_flow()).unwrap();
        let g = build_cut_graph(&sector, &chord, &[]);
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.edges.len(), 1);
        assert!((g.edges[0].2 - 0.5).abs() < 1e-6, "cross width {}", g.edges[0].2);
    }

    #[test]
    fn full_span_obstacle_zero_lanes() {
        let obstacle = WeatherObstacle {
            polygon: Polygon::new(vec![
                Point::new(0.45, 0.0),
                Point::new(0.55, 0.0),
                Point::new(0.55, 0.5),
                Point::new(0.45, 0.5),
            ])
            .unwrap(),
            active: None,
        };
        let n = lane_count(&rect(1.0, 0.5), &axis_flow(), &[obstacle], 0.1, (0.0, 1.0)).unwrap();
        assert_eq!(n, Some(0));
    }

    #[test]
    fn centered_obstacle_splits_lanes() {
        // 0.1-wide band centered in the 0.5 cross-section: 0.2 free on each side
        let obstacle = WeatherObstacle {
            polygon: Polygon::new(vec![
                Point::new(0.45, 0.2),
                Point::new(0.55, 0.2),
                Point::new(0.55, 0.3),
                Point::new(0.45, 0.3),
            ])
            .unwrap(),
            active: None,
        };
        let n = lane_count(&rect(1.0, 0.5), &axis_flow(), &[obstacle], 0.1, (0.0, 1.0)).unwrap();
        // brute-force: direct gap floor(0.5/0.1)=5; through obstacle 2+2=4
        assert_eq!(n, Some(4));
    }

    #[test]
    fn disjoint_flow_not_applicable() {
        let flow = vec![Point::new(-0.5, 5.0), Point::new(1.5, 5.0)];
        let n = lane_count(&rect(1.0, 0.5), &flow, &[], 0.1, (0.0, 1.0)).unwrap();
        assert_eq!(n, None);
    }

    #[test]
    fn two_obstacles_complete_graph() {
        let sector = rect(1.0, 0.5);
        let chord = flow_chord(&sector, &axis_flow()).unwrap();
        let obs = vec![
            vec![
                Point::new(0.2, 0.1),
                Point::new(0.3, 0.1),
                Point::new(0.3, 0.2),
                Point::new(0.2, 0.2),
            ],
            vec![
                Point::new(0.6, 0.3),
                Point::new(0.7, 0.3),
                Point::new(0.7, 0.4),
                Point::new(0.6, 0.4),
            ],
        ];
        let g = build_cut_graph(&sector, &chord, &obs);
        assert_eq!(g.nodes.len(), 4);
        assert_eq!(g.edges.len(), 6);
        assert!(g.edges.iter().all(|&(_, _, w)| w >= 0.0));
    }

    #[test]
    fn inactive_obstacle_ignored() {
        let obstacle = WeatherObstacle {
            polygon: Polygon::new(vec![
                Point::new(0.45, 0.0),
                Point::new(0.55, 0.0),
                Point::new(0.55, 0.5),
                Point::new(0.45, 0.5),
            ])
            .unwrap(),
            active: Some((100.0, 200.0)),
        };
        let n = lane_count(&rect(1.0, 0.5), &axis_flow(), &[obstacle], 0.1, (0.0, 1.0)).unwrap();
        assert_eq!(n, Some(5));
    }
}
