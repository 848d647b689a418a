//! Trajectory ingestion and workload metrics: aircraft-count profiles,
//! AC_max / AC_avg, dwell times, sector capacity and estimated delay.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{segment_polygon_crossings, Point, Polygon};
use crate::subdivision::PlanarSubdivision;

/// Time-stamped aircraft track; motion between samples is linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub flight_id: String,
    /// (time in seconds, position); times strictly increasing, >= 2 samples.
    pub samples: Vec<(f64, Point)>,
}

impl Trajectory {
    pub fn new(flight_id: impl Into<String>, samples: Vec<(f64, Point)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidInput("trajectory needs at least 2 samples".into()));
        }
        for w in samples.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidInput(format!(
                    "trajectory times not strictly increasing at t={}",
                    w[1].0
                )));
            }
        }
        Ok(Trajectory { flight_id: flight_id.into(), samples })
    }

    pub fn span(&self) -> (f64, f64) {
        (self.samples[0].0, self.samples[self.samples.len() - 1].0)
    }

    /// Position at time t, clamped to the sampled span.
    pub fn position_at(&self, t: f64) -> Point {
        if t <= self.samples[0].0 {
            return self.samples[0].1;
        }
        for w in self.samples.windows(2) {
            let ((t0, p0), (t1, p1)) = (w[0], w[1]);
            if t <= t1 {
                let f = (t - t0) / (t1 - t0);
                return p0 + (p1 - p0) * f;
            }
        }
        self.samples[self.samples.len() - 1].1
    }
}

/// Piecewise-constant aircraft count over a horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountProfile {
    pub horizon: (f64, f64),
    /// Count holds from each breakpoint time until the next; the first
    /// breakpoint is at the horizon start.
    pub breakpoints: Vec<(f64, u32)>,
}

impl CountProfile {
    pub fn constant(horizon: (f64, f64), count: u32) -> Self {
        CountProfile { horizon, breakpoints: vec![(horizon.0, count)] }
    }

    pub fn count_at(&self, t: f64) -> u32 {
        let mut c = 0;
        for &(bt, bc) in &self.breakpoints {
            if bt <= t {
                c = bc;
            } else {
                break;
            }
        }
        c
    }

    /// Iterates (t_start, t_end, count) pieces covering the horizon.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, u32)> + '_ {
        let end = self.horizon.1;
        self.breakpoints.iter().enumerate().map(move |(i, &(t, c))| {
            let next = self.breakpoints.get(i + 1).map(|&(t, _)| t).unwrap_or(end);
            (t, next, c)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CapacityMethod {
    Map,
    Welch,
    /// Welch requested but its root was unusable; MAP value substituted.
    WelchFallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorCapacity {
    pub value: f64,
    pub method: CapacityMethod,
}

/// Maximal containment intervals of one trajectory in a closed polygon,
/// as absolute (entry, exit) times.
pub fn containment_intervals(sector: &Polygon, track: &Trajectory) -> Result<Vec<(f64, f64)>> {
    let mut inside: Vec<(f64, f64)> = Vec::new();
    for w in track.samples.windows(2) {
        let ((t0, p0), (t1, p1)) = (w[0], w[1]);
        let params = if p0.distance(&p1) <= crate::geometry::EPS {
            // hovering aircraft: no crossings, containment from position alone
            Vec::new()
        } else {
            match segment_crossing_params(p0, p1, sector) {
                Ok(ts) => ts,
                Err(Error::GrazingContact { .. }) => {
                    // nudge the segment off the degenerate configuration and retry once
                    let d = Point::new(1e-7, 1e-7);
                    segment_crossing_params(p0 + d, p1 + d, sector).map_err(|_| {
                        Error::EventAmbiguity { flight: track.flight_id.clone() }
                    })?
                }
                Err(e) => return Err(e),
            }
        };
        // classify each sub-interval between crossings by its midpoint
        let mut cuts = vec![0.0];
        cuts.extend(params);
        cuts.push(1.0);
        for c in cuts.windows(2) {
            let (lo, hi) = (c[0], c[1]);
            if hi - lo <= 1e-12 {
                continue;
            }
            let mid = (lo + hi) / 2.0;
            let pt = p0 + (p1 - p0) * mid;
            if sector.contains(pt) {
                let a = t0 + lo * (t1 - t0);
                let b = t0 + hi * (t1 - t0);
                match inside.last_mut() {
                    Some(last) if (a - last.1).abs() <= 1e-9 => last.1 = b,
                    _ => inside.push((a, b)),
                }
            }
        }
    }
    Ok(inside)
}

fn segment_crossing_params(a: Point, b: Point, poly: &Polygon) -> Result<Vec<f64>> {
    Ok(segment_polygon_crossings(a, b, poly)?.into_iter().map(|c| c.t).collect())
}

/// Exact aircraft-count profile from entry/exit events.
pub fn count_profile(
    sector: &Polygon,
    tracks: &[Trajectory],
    horizon: (f64, f64),
) -> Result<CountProfile> {
    if horizon.1 <= horizon.0 {
        return Err(Error::InvalidHorizon(format!("[{}, {}]", horizon.0, horizon.1)));
    }
    // (time, delta); exits sort before entries at the same instant
    let mut events: Vec<(f64, i32)> = Vec::new();
    for track in tracks {
        for (entry, exit) in containment_intervals(sector, track)? {
            let a = entry.max(horizon.0);
            let b = exit.min(horizon.1);
            if b <= a {
                continue;
            }
            events.push((a, 1));
            events.push((b, -1));
        }
    }
    events.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then(x.1.cmp(&y.1)));
    let mut breakpoints: Vec<(f64, u32)> = vec![(horizon.0, 0)];
    let mut count: i64 = 0;
    for (t, d) in events {
        count += d as i64;
        let c = count as u32;
        match breakpoints.last_mut() {
            Some(last) if (last.0 - t).abs() <= 1e-12 => last.1 = c,
            _ => breakpoints.push((t, c)),
        }
    }
    // drop no-op breakpoints
    let mut dedup: Vec<(f64, u32)> = Vec::with_capacity(breakpoints.len());
    for bp in breakpoints {
        if dedup.last().map(|&(_, c)| c) != Some(bp.1) || dedup.is_empty() {
            dedup.push(bp);
        }
    }
    Ok(CountProfile { horizon, breakpoints: dedup })
}

pub fn ac_max(profile: &CountProfile) -> u32 {
    profile.breakpoints.iter().map(|&(_, c)| c).max().unwrap_or(0)
}

pub fn ac_avg(profile: &CountProfile) -> Result<f64> {
    let (t0, t1) = profile.horizon;
    if t1 <= t0 {
        return Err(Error::InvalidHorizon(format!("[{t0}, {t1}]")));
    }
    let mut integral = 0.0;
    for (a, b, c) in profile.pieces() {
        integral += (b - a) * c as f64;
    }
    Ok(integral / (t1 - t0))
}

/// One entry per maximal containment interval per flight.
pub fn dwell_times(sector: &Polygon, tracks: &[Trajectory]) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for track in tracks {
        for (entry, exit) in containment_intervals(sector, track)? {
            out.push((track.flight_id.clone(), exit - entry));
        }
    }
    Ok(out)
}

/// MAP capacity estimate: (5/3) times the average dwell time in minutes.
pub fn capacity_map(avg_dwell_min: f64) -> Result<SectorCapacity> {
    if avg_dwell_min <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "average dwell must be positive, got {avg_dwell_min} min"
        )));
    }
    Ok(SectorCapacity { value: 5.0 / 3.0 * avg_dwell_min, method: CapacityMethod::Map })
}

/// Welch capacity estimate: the positive root of a K^2 + b K + c = 0 with
/// a = 6.8/V, b = a + 0.025 + 7/T, c = 0.7.
///
/// With all three coefficients positive the quadratic frequently has no
/// positive root; in that case the MAP estimate is substituted and the method
/// field records the fallback.
pub fn capacity_welch(volume_nmi3: f64, avg_dwell_s: f64) -> Result<SectorCapacity> {
    if volume_nmi3 <= 0.0 || avg_dwell_s <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "welch capacity needs positive volume and dwell, got V={volume_nmi3}, T={avg_dwell_s}"
        )));
    }
    let a = 6.8 / volume_nmi3;
    let b = a + 0.025 + 7.0 / avg_dwell_s;
    let c = 0.7;
    let disc = b * b - 4.0 * a * c;
    if disc >= 0.0 {
        let k = (-b + disc.sqrt()) / (2.0 * a);
        if k > 0.0 {
            return Ok(SectorCapacity { value: k, method: CapacityMethod::Welch });
        }
    }
    log::warn!(
        "welch capacity has no positive root (V={volume_nmi3} nmi^3, T={avg_dwell_s} s); \
         falling back to MAP"
    );
    let map = capacity_map(avg_dwell_s / 60.0)?;
    Ok(SectorCapacity { value: map.value, method: CapacityMethod::WelchFallback })
}

/// Time integral of overload max(AC(t) - K, 0), in aircraft-seconds.
/// Underload does not cancel overload.
pub fn estimated_delay(profile: &CountProfile, capacity: &SectorCapacity) -> f64 {
    let mut total = 0.0;
    for (a, b, c) in profile.pieces() {
        let over = c as f64 - capacity.value;
        if over > 0.0 {
            total += over * (b - a);
        }
    }
    total
}

/// Number of aircraft inside each sector at time t, with any aircraft exactly
/// on a shared boundary owned by the lowest-indexed containing sector.
pub fn counts_at_time(sub: &PlanarSubdivision, tracks: &[Trajectory], t: f64) -> Vec<u32> {
    let polys: Vec<Polygon> = (0..sub.faces.len())
        .map(|f| Polygon::new_unchecked(sub.face_ring_points(f)))
        .collect();
    let mut counts = vec![0u32; polys.len()];
    for track in tracks {
        let (t0, t1) = track.span();
        if t < t0 || t > t1 {
            continue;
        }
        let p = track.position_at(t);
        if let Some(f) = polys.iter().position(|poly| poly.contains(p)) {
            counts[f] += 1;
        }
    }
    counts
}
