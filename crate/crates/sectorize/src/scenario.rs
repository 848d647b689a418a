//! Synthetic experiment generation and the sweep-line seed partitioner for
//! convex domains.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{convex_hull, convexity_ratio, dot, Point, Polygon, EPS};
use crate::subdivision::{from_face_polygons, PlanarSubdivision};
use crate::throughput::WeatherObstacle;
use crate::traffic::Trajectory;

/// A dominant traffic flow: a weighted polyline route structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flow {
    pub name: String,
    #[serde(default = "default_weight")]
    pub weight: f64,
    pub points: Vec<Point>,
}

fn default_weight() -> f64 {
    1.0
}

/// An airport or major-flow intersection that must stay away from boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub id: String,
    pub position: Point,
}

/// Bundle of everything a cost evaluation needs besides the sectorization.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub domain: Polygon,
    pub tracks: Vec<Trajectory>,
    pub flows: Vec<Flow>,
    pub critical_points: Vec<CriticalPoint>,
    pub weather: Vec<WeatherObstacle>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub seed: u64,
    pub airport_count: usize,
    pub weight_mean: f64,
    pub weight_stddev: f64,
    /// Side of the square holding the airports, degrees.
    pub outer_side: f64,
    /// Side of the centered region of interest, degrees.
    pub roi_side: f64,
    pub flight_count: usize,
    pub weather_cell_count: usize,
    /// Weather cell radius range, degrees.
    pub weather_size: (f64, f64),
    pub horizon_s: f64,
    /// Uniform aircraft speed, degrees per second.
    pub speed_deg_per_s: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            seed: 0,
            airport_count: 20,
            weight_mean: 1.0,
            weight_stddev: 0.3,
            outer_side: 12.0,
            roi_side: 9.0,
            flight_count: 50,
            weather_cell_count: 2,
            weather_size: (0.5, 1.5),
            horizon_s: 3600.0,
            speed_deg_per_s: 0.13 / 60.0,
        }
    }
}

/// Deterministic synthetic scenario: airports uniform in the outer square
/// with normally distributed weights, straight uniform-speed flights between
/// weight-sampled airport pairs, and random convex weather cells in the
/// region of interest.
pub fn generate_scenario(params: &ScenarioParams) -> Result<Scenario> {
    if params.roi_side >= params.outer_side {
        return Err(Error::InvalidInput(
            "region of interest must be strictly inside the outer square".into(),
        ));
    }
    if params.airport_count == 0 && params.flight_count > 0 {
        return Err(Error::InvalidInput("flights require at least one airport".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let side = params.outer_side;
    let normal = Normal::new(params.weight_mean, params.weight_stddev)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let airports: Vec<(Point, f64)> = (0..params.airport_count)
        .map(|_| {
            let p = Point::new(rng.gen_range(0.0..side), rng.gen_range(0.0..side));
            let w: f64 = normal.sample(&mut rng);
            (p, w.max(0.1))
        })
        .collect();
    let total_w: f64 = airports.iter().map(|a| a.1).sum();
    let pick = |rng: &mut ChaCha8Rng| -> usize {
        let mut x = rng.gen_range(0.0..total_w);
        for (i, a) in airports.iter().enumerate() {
            if x < a.1 {
                return i;
            }
            x -= a.1;
        }
        airports.len() - 1
    };
    let mut tracks = Vec::with_capacity(params.flight_count);
    for f in 0..params.flight_count {
        let origin = pick(&mut rng);
        let mut dest = pick(&mut rng);
        while airports.len() > 1 && dest == origin {
            dest = pick(&mut rng);
        }
        let (o, d) = (airports[origin].0, airports[dest].0);
        let depart = rng.gen_range(0.0..params.horizon_s);
        let duration = (o.distance(&d) / params.speed_deg_per_s).max(1.0);
        tracks.push(Trajectory::new(
            format!("F{f:04}"),
            vec![(depart, o), (depart + duration, d)],
        )?);
    }
    let margin = (side - params.roi_side) / 2.0;
    let roi_lo = margin;
    let roi_hi = side - margin;
    let domain = Polygon::new(vec![
        Point::new(roi_lo, roi_lo),
        Point::new(roi_hi, roi_lo),
        Point::new(roi_hi, roi_hi),
        Point::new(roi_lo, roi_hi),
    ])?;
    let mut weather = Vec::with_capacity(params.weather_cell_count);
    for _ in 0..params.weather_cell_count {
        let r = rng.gen_range(params.weather_size.0..=params.weather_size.1);
        let cx = rng.gen_range(roi_lo + r..roi_hi - r);
        let cy = rng.gen_range(roi_lo + r..roi_hi - r);
        // convex cell: hull of random points in the disk
        let pts: Vec<Point> = (0..10)
            .map(|_| {
                let ang = rng.gen_range(0.0..std::f64::consts::TAU);
                let rr = r * rng.gen_range(0.5f64..1.0).sqrt();
                Point::new(cx + rr * ang.cos(), cy + rr * ang.sin())
            })
            .collect();
        weather.push(WeatherObstacle { polygon: convex_hull(&pts)?, active: None });
    }
    let critical_points = airports
        .iter()
        .enumerate()
        .filter(|(_, (p, _))| domain.contains(*p))
        .map(|(i, (p, _))| CriticalPoint { id: format!("A{i:03}"), position: *p })
        .collect();
    Ok(Scenario { domain, tracks, flows: Vec::new(), critical_points, weather })
}

/// Total geometric length of the track portions inside the polygon.
pub fn clipped_track_length(poly: &Polygon, tracks: &[Trajectory]) -> f64 {
    clip_segments(poly, tracks).iter().map(|(p, q)| p.distance(q)).sum()
}

/// Track sub-segments inside the polygon, by midpoint classification.
fn clip_segments(poly: &Polygon, tracks: &[Trajectory]) -> Vec<(Point, Point)> {
    let mut out = Vec::new();
    for track in tracks {
        for w in track.samples.windows(2) {
            let (p0, p1) = (w[0].1, w[1].1);
            if p0.distance(&p1) <= EPS {
                continue;
            }
            let ts: Vec<f64> = match crate::geometry::segment_polygon_crossings(p0, p1, poly) {
                Ok(c) => c.iter().map(|x| x.t).collect(),
                Err(_) => {
                    let d = Point::new(1e-7, 1e-7);
                    match crate::geometry::segment_polygon_crossings(p0 + d, p1 + d, poly) {
                        Ok(c) => c.iter().map(|x| x.t).collect(),
                        Err(_) => continue,
                    }
                }
            };
            let mut cuts = vec![0.0];
            cuts.extend(ts);
            cuts.push(1.0);
            for c in cuts.windows(2) {
                if c[1] - c[0] <= 1e-12 {
                    continue;
                }
                let mid = p0 + (p1 - p0) * ((c[0] + c[1]) / 2.0);
                if poly.contains(mid) {
                    out.push((p0 + (p1 - p0) * c[0], p0 + (p1 - p0) * c[1]));
                }
            }
        }
    }
    out
}

/// Slices a convex domain into k slabs perpendicular to `direction`, each
/// holding an equal share of the clipped trajectory length. Cut positions are
/// found by bisection on the monotone cumulative length function.
pub fn sweep_seed(
    domain: &Polygon,
    tracks: &[Trajectory],
    k: usize,
    direction: Point,
) -> Result<PlanarSubdivision> {
    if k == 0 {
        return Err(Error::InvalidInput("sector count must be at least 1".into()));
    }
    if convexity_ratio(domain)? < 1.0 - 1e-9 {
        return Err(Error::UnsupportedDomain("sweep seeding requires a convex domain".into()));
    }
    let dlen = direction.distance(&Point::new(0.0, 0.0));
    if dlen <= EPS {
        return Err(Error::InvalidInput("sweep direction must be non-zero".into()));
    }
    let dir = Point::new(direction.x / dlen, direction.y / dlen);
    if k == 1 {
        return from_face_polygons(&[("s0".into(), domain.vertices().to_vec())]);
    }
    let inside = clip_segments(domain, tracks);
    let total: f64 = inside.iter().map(|(p, q)| p.distance(q)).sum();
    if total <= 0.0 {
        return Err(Error::InvalidInput("no in-domain trajectory length to balance".into()));
    }
    // cumulative clipped length up to sweep coordinate c
    let cumulative = |c: f64| -> f64 {
        inside
            .iter()
            .map(|&(p, q)| {
                let (sa, sb) = (dot(p, dir), dot(q, dir));
                let (lo, hi) = if sa < sb { (sa, sb) } else { (sb, sa) };
                let len = p.distance(&q);
                if hi <= c {
                    len
                } else if lo >= c {
                    0.0
                } else {
                    len * (c - lo) / (hi - lo)
                }
            })
            .sum()
    };
    let smin = domain.vertices().iter().map(|p| dot(*p, dir)).fold(f64::INFINITY, f64::min);
    let smax = domain.vertices().iter().map(|p| dot(*p, dir)).fold(f64::NEG_INFINITY, f64::max);
    let mut cuts = Vec::with_capacity(k - 1);
    for i in 1..k {
        let target = total * i as f64 / k as f64;
        let (mut lo, mut hi) = (smin, smax);
        for _ in 0..200 {
            let mid = (lo + hi) / 2.0;
            if cumulative(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        cuts.push((lo + hi) / 2.0);
    }
    build_slabs(domain, dir, &cuts)
}

#[derive(Clone, Copy)]
enum RingTag {
    Original(f64),
    Cut(usize),
}

fn build_slabs(domain: &Polygon, dir: Point, cuts: &[f64]) -> Result<PlanarSubdivision> {
    // augmented boundary ring with every cut's two chord endpoints inserted
    let n = domain.len();
    let mut ring: Vec<(Point, RingTag)> = Vec::new();
    for i in 0..n {
        let (a, b) = domain.edge(i);
        ring.push((a, RingTag::Original(dot(a, dir))));
        let (sa, sb) = (dot(a, dir), dot(b, dir));
        let mut hits: Vec<(f64, Point, usize)> = Vec::new();
        for (j, &c) in cuts.iter().enumerate() {
            if (sa < c - EPS && sb > c + EPS) || (sa > c + EPS && sb < c - EPS) {
                let t = (c - sa) / (sb - sa);
                hits.push((t, a + (b - a) * t, j));
            }
        }
        hits.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        for (_, p, j) in hits {
            ring.push((p, RingTag::Cut(j)));
        }
    }
    let m = ring.len();
    let mut faces: Vec<(String, Vec<Point>)> = Vec::with_capacity(cuts.len() + 1);
    for slab in 0..=cuts.len() {
        let lo = if slab == 0 { f64::NEG_INFINITY } else { cuts[slab - 1] };
        let hi = if slab == cuts.len() { f64::INFINITY } else { cuts[slab] };
        let selected = |tag: &RingTag| match *tag {
            RingTag::Original(s) => s > lo + EPS && s < hi - EPS,
            RingTag::Cut(j) => (slab > 0 && j == slab - 1) || (slab < cuts.len() && j == slab),
        };
        // start at a non-selected entry so the selected subsequence is a path
        let start = (0..m)
            .find(|&i| !selected(&ring[i].1))
            .ok_or_else(|| Error::InvalidGeometry("slab covers entire boundary".into()))?;
        let mut pts = Vec::new();
        for off in 0..m {
            let (p, tag) = ring[(start + off) % m];
            if selected(&tag) {
                pts.push(p);
            }
        }
        if pts.len() < 3 {
            return Err(Error::InvalidGeometry(format!(
                "sweep slab {slab} degenerated; cuts too close together"
            )));
        }
        faces.push((format!("s{slab}"), pts));
    }
    from_face_polygons(&faces)
}
