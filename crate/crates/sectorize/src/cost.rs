//! The 12-constraint penalty system: per-parameter evaluation, both penalty
//! branches, and the weighted per-sector objective.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{
    convexity_ratio, interior_angles, point_segment_distance, polygon_area,
    segment_polygon_crossings, Point, Polygon,
};
use crate::scenario::{CriticalPoint, Flow};
use crate::subdivision::PlanarSubdivision;
use crate::throughput::{lane_count, WeatherObstacle};
use crate::traffic::{
    ac_avg, ac_max, capacity_map, capacity_welch, count_profile, dwell_times, estimated_delay,
    CountProfile, SectorCapacity,
};

/// Whether a constraint bounds its parameter from above or below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Limit {
    Finite(f64),
    Unbounded,
}

/// One row of the constraint table: threshold, physical limit, weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    /// Constraint id, 1 through 12.
    pub id: u8,
    pub threshold: f64,
    pub limit: Limit,
    pub direction: Direction,
    pub weight: f64,
}

/// Physical limit and direction for each constraint id.
pub fn table_limit(id: u8) -> (Limit, Direction) {
    match id {
        1 | 2 | 3 => (Limit::Unbounded, Direction::Upper),
        4 | 5 | 7 | 8 | 9 | 12 => (Limit::Finite(0.0), Direction::Lower),
        6 => (Limit::Finite(90.0), Direction::Upper),
        10 => (Limit::Finite(360.0), Direction::Upper),
        11 => (Limit::Finite(0.0), Direction::Lower),
        _ => panic!("constraint id {id} out of range"),
    }
}

/// Default threshold per the constraint table; ids 1 and 2 have none.
pub fn table_default_threshold(id: u8) -> Option<f64> {
    match id {
        1 | 2 => None,
        3 => Some(0.0),
        4 => Some(2.0),
        5 => Some(300.0),
        6 => Some(45.0),
        7 => Some(0.3),
        8 => Some(0.4),
        9 => Some(80.0),
        10 => Some(180.0),
        11 => Some(0.90),
        12 => Some(0.4),
        _ => panic!("constraint id {id} out of range"),
    }
}

impl ConstraintSpec {
    pub fn from_table(id: u8, threshold: f64, weight: f64) -> Self {
        let (limit, direction) = table_limit(id);
        ConstraintSpec { id, threshold, limit, direction, weight }
    }
}

/// Penalty for one parameter value. Zero in the feasible region, exactly 1 at
/// the threshold, growing toward the limit. A parameter at or past a finite
/// limit returns infinity: the configuration is infeasible.
pub fn penalty(p: f64, spec: &ConstraintSpec) -> f64 {
    let t = spec.threshold;
    match spec.limit {
        Limit::Unbounded => {
            // only upper-bounded constraints have an unbounded limit
            if p >= t {
                (p - t) * (p - t) + 1.0
            } else {
                0.0
            }
        }
        Limit::Finite(l) => match spec.direction {
            Direction::Upper => {
                if p < t {
                    0.0
                } else if p < l {
                    (t - l) / (p - l)
                } else {
                    f64::INFINITY
                }
            }
            Direction::Lower => {
                if p > t {
                    0.0
                } else if p > l {
                    (t - l) / (p - l)
                } else {
                    f64::INFINITY
                }
            }
        },
    }
}

/// Capacity estimation choices for the delay constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapacitySelection {
    Map,
    Welch,
}

/// Evaluation knobs that are not part of the constraint table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub horizon: (f64, f64),
    pub capacity: CapacitySelection,
    /// Lane width for the throughput constraint, degrees.
    pub lane_width_deg: f64,
    /// Arc-length exemption window around flow/boundary crossings for the
    /// DF-distance constraint, degrees. The table's T7 by default.
    pub df_window_deg: f64,
    /// Scale for converting degrees to nautical miles (Welch volume).
    pub nmi_per_deg: f64,
    /// Altitude slab thickness in nmi (Welch volume).
    pub slab_thickness_nmi: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            horizon: (0.0, 3600.0),
            capacity: CapacitySelection::Map,
            lane_width_deg: 0.13,
            df_window_deg: 0.3,
            nmi_per_deg: 60.0,
            slab_thickness_nmi: 6.0,
        }
    }
}

/// Everything needed to evaluate one sector of one sectorization snapshot.
pub struct SectorContext<'a> {
    pub sector: Polygon,
    pub face: usize,
    pub sub: &'a PlanarSubdivision,
    pub profile: CountProfile,
    pub capacity: Option<SectorCapacity>,
    pub dwells: Vec<(String, f64)>,
    pub flows: &'a [Flow],
    pub critical_points: &'a [CriticalPoint],
    pub weather: &'a [WeatherObstacle],
    pub opts: EvalOptions,
}

pub fn build_context<'a>(
    sub: &'a PlanarSubdivision,
    face: usize,
    tracks: &[crate::traffic::Trajectory],
    flows: &'a [Flow],
    critical_points: &'a [CriticalPoint],
    weather: &'a [WeatherObstacle],
    opts: EvalOptions,
) -> Result<SectorContext<'a>> {
    let sector = sub.face_polygon(face)?;
    let profile = count_profile(&sector, tracks, opts.horizon)?;
    let dwells = dwell_times(&sector, tracks)?;
    let capacity = if dwells.is_empty() {
        None
    } else {
        let avg_s = dwells.iter().map(|d| d.1).sum::<f64>() / dwells.len() as f64;
        Some(match opts.capacity {
            CapacitySelection::Map => capacity_map(avg_s / 60.0)?,
            CapacitySelection::Welch => {
                let volume = polygon_area(&sector)
                    * opts.nmi_per_deg
                    * opts.nmi_per_deg
                    * opts.slab_thickness_nmi;
                capacity_welch(volume, avg_s)?
            }
        })
    };
    Ok(SectorContext {
        sector,
        face,
        sub,
        profile,
        capacity,
        dwells,
        flows,
        critical_points,
        weather,
        opts,
    })
}

/// Parameter instances per constraint id for one sector.
pub fn evaluate_parameters(ctx: &SectorContext) -> Result<BTreeMap<u8, Vec<f64>>> {
    let mut out: BTreeMap<u8, Vec<f64>> = BTreeMap::new();
    out.insert(1, vec![ac_avg(&ctx.profile)?]);
    out.insert(2, vec![ac_max(&ctx.profile) as f64]);
    let delay = match &ctx.capacity {
        Some(cap) => estimated_delay(&ctx.profile, cap),
        None => 0.0,
    };
    out.insert(3, vec![delay]);

    // rows 4, 6, 7 are per dominant flow
    let mut lanes = Vec::new();
    let mut crossing_devs = Vec::new();
    let mut flow_distances = Vec::new();
    for flow in ctx.flows {
        if let Some(n) = lane_count(
            &ctx.sector,
            &flow.points,
            ctx.weather,
            ctx.opts.lane_width_deg,
            ctx.opts.horizon,
        )? {
            lanes.push(n as f64);
        }
        let crossings = flow_boundary_crossings(&ctx.sector, &flow.points)?;
        for &(_, _, angle) in &crossings {
            crossing_devs.push(90.0 - angle);
        }
        if let Some(d) = flow_clearance(&ctx.sector, &flow.points, &crossings, ctx.opts.df_window_deg)
        {
            flow_distances.push(d);
        }
    }
    out.insert(4, lanes);
    out.insert(6, crossing_devs);
    out.insert(7, flow_distances);

    out.insert(5, ctx.dwells.iter().map(|d| d.1).collect());

    let mut cp_distances = Vec::new();
    for cp in ctx.critical_points {
        if owner_face(ctx.sub, cp.position) == Some(ctx.face) {
            cp_distances.push(ctx.sub.point_to_boundary_distance(cp.position));
        }
    }
    out.insert(8, cp_distances);

    let angles = interior_angles(&ctx.sector)?;
    out.insert(9, angles.clone());
    out.insert(10, angles);
    out.insert(11, vec![convexity_ratio(&ctx.sector)?]);
    let n = ctx.sector.len();
    out.insert(
        12,
        (0..n)
            .map(|i| {
                let (a, b) = ctx.sector.edge(i);
                a.distance(&b)
            })
            .collect(),
    );
    Ok(out)
}

/// The lowest-indexed face containing the point, if any.
pub fn owner_face(sub: &PlanarSubdivision, p: Point) -> Option<usize> {
    (0..sub.faces.len())
        .find(|&f| Polygon::new_unchecked(sub.face_ring_points(f)).contains(p))
}

/// Crossings of a flow polyline with the sector boundary:
/// (arc length along the flow, edge index, acute crossing angle in degrees).
fn flow_boundary_crossings(sector: &Polygon, flow: &[Point]) -> Result<Vec<(f64, usize, f64)>> {
    let mut out = Vec::new();
    let mut arc = 0.0;
    for w in flow.windows(2) {
        let (a, b) = (w[0], w[1]);
        let seg = a.distance(&b);
        if seg <= crate::geometry::EPS {
            continue;
        }
        let crossings = match segment_polygon_crossings(a, b, sector) {
            Ok(c) => c,
            Err(crate::error::Error::GrazingContact { .. }) => {
                let d = Point::new(1e-7, 1e-7);
                segment_polygon_crossings(a + d, b + d, sector)?
            }
            Err(e) => return Err(e),
        };
        for c in crossings {
            out.push((arc + c.t * seg, c.edge, c.angle_deg));
        }
        arc += seg;
    }
    Ok(out)
}

/// Minimum distance from the flow to boundary edges it does not cross,
/// skipping flow samples within `window` arc length of any crossing point.
/// None when the flow never comes near the sector or every edge is crossed.
fn flow_clearance(
    sector: &Polygon,
    flow: &[Point],
    crossings: &[(f64, usize, f64)],
    window: f64,
) -> Option<f64> {
    let near = flow.iter().any(|&p| sector.contains(p)) || !crossings.is_empty();
    if !near {
        return None;
    }
    let crossed: std::collections::HashSet<usize> = crossings.iter().map(|c| c.1).collect();
    let uncrossed: Vec<usize> = (0..sector.len()).filter(|i| !crossed.contains(i)).collect();
    if uncrossed.is_empty() {
        return None;
    }
    let step = (window / 20.0).max(1e-6);
    let mut best = f64::INFINITY;
    let mut arc = 0.0;
    for w in flow.windows(2) {
        let (a, b) = (w[0], w[1]);
        let seg = a.distance(&b);
        if seg <= crate::geometry::EPS {
            continue;
        }
        let samples = (seg / step).ceil() as usize;
        for i in 0..=samples {
            let t = i as f64 / samples as f64;
            let s = arc + t * seg;
            if crossings.iter().any(|c| (c.0 - s).abs() <= window) {
                continue;
            }
            let p = a + (b - a) * t;
            for &e in &uncrossed {
                let (ea, eb) = sector.edge(e);
                best = best.min(point_segment_distance(p, ea, eb));
            }
        }
        arc += seg;
    }
    if best.is_finite() {
        Some(best)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowReport {
    pub id: u8,
    pub values: Vec<f64>,
    pub penalty: f64,
    pub weight: f64,
    pub weighted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub rows: Vec<RowReport>,
    pub total: f64,
}

/// Sums per-instance penalties per constraint and weights them into the
/// sector objective. Constraints without a spec (unset thresholds) are
/// skipped.
pub fn sector_cost(ctx: &SectorContext, specs: &[ConstraintSpec]) -> Result<CostReport> {
    let params = evaluate_parameters(ctx)?;
    let mut rows = Vec::with_capacity(specs.len());
    let mut total = 0.0;
    for spec in specs {
        let values = params.get(&spec.id).cloned().unwrap_or_default();
        // the trailing + 0.0 turns an empty sum's -0.0 into +0.0
        let p: f64 = values.iter().map(|&v| penalty(v, spec)).sum::<f64>() + 0.0;
        let weighted = spec.weight * p;
        total += weighted;
        rows.push(RowReport { id: spec.id, values, penalty: p, weight: spec.weight, weighted });
    }
    Ok(CostReport { rows, total })
}
