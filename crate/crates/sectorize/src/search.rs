//! Local boundary adjustment: candidate generation (vertex moves, edge
//! flips), feasibility checks, and the greedy worst-sector descent loop.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::subdivision::{PlanarSubdivision, VertexClass};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AdjustmentKind {
    VertexMove { vertex: usize, to: Point },
    EdgeFlip { edge: usize, a: Point, b: Point },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adjustment {
    pub kind: AdjustmentKind,
    /// Faces whose geometry the adjustment touches.
    pub affected_faces: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Half-width of the square candidate grid around a vertex, degrees.
    pub move_radius: f64,
    /// Grid pitch; candidates sit at odd half-multiples so the current
    /// position is never a candidate.
    pub move_step: f64,
    /// New-edge lengths tried by a flip, as multiples of the old length.
    pub flip_length_factors: Vec<f64>,
    /// Cap on accepted adjustments before the loop truncates.
    pub max_iterations: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            move_radius: 0.4,
            move_step: 0.15,
            flip_length_factors: vec![0.5, 1.0, 1.5],
            max_iterations: 10_000,
        }
    }
}

/// Staggered 1-D grid offsets: +/-(k + 1/2) * step within the radius.
fn grid_offsets(radius: f64, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0;
    loop {
        let off = (k as f64 + 0.5) * step;
        if off > radius {
            break;
        }
        out.push(off);
        out.push(-off);
        k += 1;
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// Candidate target positions for one vertex. Interior vertices get the full
/// 2-D grid; boundary vertices that sit on a straight outer run slide along
/// it, clamped strictly between their boundary neighbours; corner vertices
/// are immovable.
pub fn candidate_vertex_positions(
    sub: &PlanarSubdivision,
    vertex: usize,
    cfg: &SearchConfig,
) -> Vec<Point> {
    let offs = grid_offsets(cfg.move_radius, cfg.move_step);
    let v = sub.vertices[vertex];
    match sub.classify_vertex(vertex) {
        VertexClass::Interior => {
            let mut out = Vec::with_capacity(offs.len() * offs.len());
            for &dx in &offs {
                for &dy in &offs {
                    out.push(Point::new(v.x + dx, v.y + dy));
                }
            }
            out
        }
        VertexClass::BoundarySlide { prev, next } => {
            let p = sub.vertices[prev];
            let n = sub.vertices[next];
            let len = p.distance(&n);
            if len <= crate::geometry::EPS {
                return Vec::new();
            }
            let d = (n - p) * (1.0 / len);
            let t0 = (v - p).x * d.x + (v - p).y * d.y;
            let margin = 1e-6;
            offs.iter()
                .filter_map(|&s| {
                    let t = t0 + s;
                    if t > margin && t < len - margin {
                        Some(p + d * t)
                    } else {
                        None
                    }
                })
                .collect()
        }
        VertexClass::Fixed => Vec::new(),
    }
}

/// Candidate endpoint pairs for flipping one interior edge: the flipped edge
/// is perpendicular to the old one through its midpoint, at each configured
/// length factor. Only edges whose endpoints are both interior and of degree
/// three are flippable.
pub fn candidate_edge_flips(
    sub: &PlanarSubdivision,
    edge: usize,
    cfg: &SearchConfig,
) -> Vec<(Point, Point)> {
    let e = &sub.edges[edge];
    if e.outer {
        return Vec::new();
    }
    for &end in &[e.a, e.b] {
        if sub.classify_vertex(end) != VertexClass::Interior || sub.degree(end) != 3 {
            return Vec::new();
        }
    }
    let (u, v) = (sub.vertices[e.a], sub.vertices[e.b]);
    let len = u.distance(&v);
    if len <= crate::geometry::EPS {
        return Vec::new();
    }
    let m = Point::new((u.x + v.x) / 2.0, (u.y + v.y) / 2.0);
    let perp = Point::new(-(v.y - u.y) / len, (v.x - u.x) / len);
    cfg.flip_length_factors
        .iter()
        .map(|&f| {
            let h = f * len / 2.0;
            (m + perp * h, m - perp * h)
        })
        .collect()
}

/// Applies an adjustment to a copy of the subdivision and validates the
/// result. Returns None when the adjustment is infeasible.
pub fn try_apply(sub: &PlanarSubdivision, adj: &Adjustment) -> Option<PlanarSubdivision> {
    let mut out = sub.clone();
    match &adj.kind {
        AdjustmentKind::VertexMove { vertex, to } => {
            out.vertices[*vertex] = *to;
        }
        AdjustmentKind::EdgeFlip { edge, a, b } => {
            if !apply_flip(&mut out, *edge, *a, *b) {
                return None;
            }
        }
    }
    if out.validate().is_empty() {
        Some(out)
    } else {
        None
    }
}

/// Rewires an edge flip: moves the endpoints to the new perpendicular
/// positions, reattaches the four neighbouring edges to the nearer endpoint,
/// and repairs the rings of every face that touched the edge.
fn apply_flip(sub: &mut PlanarSubdivision, edge: usize, a: Point, b: Point) -> bool {
    let (u, v) = (sub.edges[edge].a, sub.edges[edge].b);
    sub.vertices[u] = a;
    sub.vertices[v] = b;
    for i in 0..sub.edges.len() {
        if i == edge {
            continue;
        }
        let e = sub.edges[i].clone();
        let (endpoint, other) = if e.a == u || e.a == v {
            (0, e.b)
        } else if e.b == u || e.b == v {
            (1, e.a)
        } else {
            continue;
        };
        let w = sub.vertices[other];
        let target = if w.distance(&a) <= w.distance(&b) { u } else { v };
        if endpoint == 0 {
            sub.edges[i].a = target;
        } else {
            sub.edges[i].b = target;
        }
    }
    if sub.degree(u) != 3 || sub.degree(v) != 3 {
        return false;
    }
    let faces: Vec<usize> = (0..sub.faces.len())
        .filter(|&f| sub.faces[f].ring.iter().any(|&x| x == u || x == v))
        .collect();
    for f in faces {
        if !repair_ring(sub, f, u, v) {
            return false;
        }
    }
    true
}

/// Replaces the contiguous run of flip endpoints in a face ring with the
/// unique substitution whose every junction is an existing edge.
fn repair_ring(sub: &mut PlanarSubdivision, face: usize, u: usize, v: usize) -> bool {
    let ring = sub.faces[face].ring.clone();
    let n = ring.len();
    let is_end = |x: usize| x == u || x == v;
    // rotate so the ring does not start mid-run
    let start = match (0..n).find(|&i| !is_end(ring[i])) {
        Some(s) => s,
        None => return false,
    };
    let rot: Vec<usize> = (0..n).map(|i| ring[(start + i) % n]).collect();
    let first = rot.iter().position(|&x| is_end(x)).unwrap();
    let run_len = rot[first..].iter().take_while(|&&x| is_end(x)).count();
    if rot[first + run_len..].iter().any(|&x| is_end(x)) {
        return false; // endpoints appear in two separate runs
    }
    let before = rot[first - 1];
    let after = rot[(first + run_len) % n];
    let candidates: [&[usize]; 4] = [&[u], &[v], &[u, v], &[v, u]];
    let mut fixed: Option<Vec<usize>> = None;
    for cand in candidates {
        let mut path = vec![before];
        path.extend_from_slice(cand);
        path.push(after);
        let ok = path.windows(2).all(|w| sub.edge_index(w[0], w[1]).is_some());
        if ok {
            let mut new_ring = rot[..first].to_vec();
            new_ring.extend_from_slice(cand);
            new_ring.extend_from_slice(&rot[first + run_len..]);
            match &fixed {
                Some(prev) if *prev != new_ring => return false, // ambiguous
                _ => fixed = Some(new_ring),
            }
        }
    }
    match fixed {
        Some(r) => {
            sub.faces[face].ring = r;
            true
        }
        None => false,
    }
}

/// All feasible adjustments touching one face, in deterministic order:
/// vertex moves along the ring first, then edge flips along the ring.
pub fn face_adjustments(
    sub: &PlanarSubdivision,
    face: usize,
    cfg: &SearchConfig,
) -> Vec<Adjustment> {
    let mut out = Vec::new();
    let ring = &sub.faces[face].ring;
    for &vtx in ring {
        for to in candidate_vertex_positions(sub, vtx, cfg) {
            out.push(Adjustment {
                kind: AdjustmentKind::VertexMove { vertex: vtx, to },
                affected_faces: sub.faces_with_vertex(vtx),
            });
        }
    }
    let n = ring.len();
    for i in 0..n {
        let e = match sub.edge_index(ring[i], ring[(i + 1) % n]) {
            Some(e) => e,
            None => continue,
        };
        let (u, v) = (sub.edges[e].a, sub.edges[e].b);
        let mut affected: Vec<usize> = (0..sub.faces.len())
            .filter(|&f| sub.faces[f].ring.iter().any(|&x| x == u || x == v))
            .collect();
        affected.dedup();
        for (a, b) in candidate_edge_flips(sub, e, cfg) {
            out.push(Adjustment {
                kind: AdjustmentKind::EdgeFlip { edge: e, a, b },
                affected_faces: affected.clone(),
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub iteration: usize,
    pub face: String,
    pub adjustment: AdjustmentKind,
    pub cost_before: f64,
    pub cost_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationLog {
    pub entries: Vec<LogEntry>,
    pub initial_costs: Vec<f64>,
    pub final_costs: Vec<f64>,
    pub truncated: bool,
}

/// Greedy worst-sector descent. Repeatedly visits sectors from costliest to
/// cheapest; for the current sector it applies the feasible adjustment that
/// minimises the worst post-adjustment cost among touched sectors, provided
/// that worst cost is strictly below the sector's current cost. Every
/// acceptance restarts the scan. Stops when no sector can be improved, or
/// truncates at the iteration cap.
pub fn optimize<F>(
    sub: &PlanarSubdivision,
    cfg: &SearchConfig,
    mut cost_fn: F,
) -> Result<(PlanarSubdivision, OptimizationLog)>
where
    F: FnMut(&PlanarSubdivision, usize) -> Result<f64>,
{
    let mut current = sub.clone();
    let mut costs: Vec<f64> = (0..current.faces.len())
        .map(|f| cost_fn(&current, f))
        .collect::<Result<_>>()?;
    let initial_costs = costs.clone();
    let mut log = Vec::new();
    let mut truncated = false;
    let mut iteration = 0usize;

    'outer: loop {
        let mut order: Vec<usize> = (0..current.faces.len()).collect();
        order.sort_by(|&a, &b| costs[b].partial_cmp(&costs[a]).unwrap().then(a.cmp(&b)));
        for &face in &order {
            let c0 = costs[face];
            if c0 <= 0.0 {
                continue;
            }
            let mut best: Option<(f64, Adjustment, PlanarSubdivision, Vec<f64>)> = None;
            for adj in face_adjustments(&current, face, cfg) {
                let next = match try_apply(&current, &adj) {
                    Some(s) => s,
                    None => continue,
                };
                let mut new_costs = Vec::with_capacity(adj.affected_faces.len());
                let mut worst = f64::NEG_INFINITY;
                let mut bail = false;
                for &f in &adj.affected_faces {
                    let c = cost_fn(&next, f)?;
                    if !c.is_finite() {
                        bail = true;
                        break;
                    }
                    worst = worst.max(c);
                    new_costs.push(c);
                }
                if bail || worst >= c0 {
                    continue;
                }
                let better = match &best {
                    Some((w, ..)) => worst < *w,
                    None => true,
                };
                if better {
                    best = Some((worst, adj, next, new_costs));
                }
            }
            if let Some((_, adj, next, new_costs)) = best {
                for (i, &f) in adj.affected_faces.iter().enumerate() {
                    costs[f] = new_costs[i];
                }
                iteration += 1;
                log.push(LogEntry {
                    iteration,
                    face: current.faces[face].name.clone(),
                    adjustment: adj.kind.clone(),
                    cost_before: c0,
                    cost_after: costs[face],
                });
                current = next;
                if iteration >= cfg.max_iterations {
                    truncated = true;
                    break 'outer;
                }
                continue 'outer;
            }
        }
        break;
    }

    let final_costs = costs;
    Ok((
        current,
        OptimizationLog { entries: log, initial_costs, final_costs, truncated },
    ))
}

/// Convenience wrapper returning an error when the cost function reports an
/// infeasible (non-finite) starting sector.
pub fn ensure_finite_start(costs: &[f64]) -> Result<()> {
    if costs.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::ContractViolation(
            "initial sectorization has an infeasible sector".into(),
        ))
    }
}
