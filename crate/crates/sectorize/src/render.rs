//! Deterministic SVG rendering of a sectorization with overlays: sector
//! outlines with per-sector cost labels, flow polylines, critical-point
//! dots, and hatched weather polygons.

use std::fmt::Write as _;

use crate::error::Result;
use crate::geometry::Point;
use crate::scenario::{CriticalPoint, Flow};
use crate::subdivision::PlanarSubdivision;
use crate::throughput::WeatherObstacle;

const CANVAS: f64 = 800.0;
const MARGIN: f64 = 40.0;

fn fmt(v: f64) -> String {
    // fixed precision keeps output byte-stable across platforms
    format!("{v:.3}")
}

struct Mapper {
    min: Point,
    scale: f64,
    height: f64,
}

impl Mapper {
    fn new(sub: &PlanarSubdivision) -> Mapper {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &sub.vertices {
            min.x = min.x.min(v.x);
            min.y = min.y.min(v.y);
            max.x = max.x.max(v.x);
            max.y = max.y.max(v.y);
        }
        let span = (max.x - min.x).max(max.y - min.y).max(1e-9);
        let scale = (CANVAS - 2.0 * MARGIN) / span;
        Mapper { min, scale, height: (max.y - min.y) * scale + 2.0 * MARGIN }
    }

    fn map(&self, p: Point) -> (f64, f64) {
        (
            MARGIN + (p.x - self.min.x) * self.scale,
            self.height - MARGIN - (p.y - self.min.y) * self.scale,
        )
    }
}

/// Overlay data for a rendering pass. Cost labels pair face index with the
/// sector's total cost; faces without an entry get no label.
#[derive(Default)]
pub struct Overlays<'a> {
    pub flows: &'a [Flow],
    pub critical_points: &'a [CriticalPoint],
    pub weather: &'a [WeatherObstacle],
    pub costs: Vec<(usize, f64)>,
}

pub fn render_svg(sub: &PlanarSubdivision, overlays: &Overlays) -> Result<String> {
    let m = Mapper::new(sub);
    let mut s = String::new();
    writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"##,
        fmt(CANVAS),
        fmt(m.height),
        fmt(CANVAS),
        fmt(m.height)
    )
    .unwrap();
    writeln!(
        s,
        r##"<defs><pattern id="hatch" width="8" height="8" patternUnits="userSpaceOnUse"><path d="M0,8 L8,0" stroke="#d08080" stroke-width="1.5"/></pattern></defs>"##
    )
    .unwrap();

    for f in 0..sub.faces.len() {
        let pts: Vec<String> = sub
            .face_ring_points(f)
            .iter()
            .map(|&p| {
                let (x, y) = m.map(p);
                format!("{},{}", fmt(x), fmt(y))
            })
            .collect();
        writeln!(
            s,
            r##"<polygon points="{}" fill="none" stroke="#303030" stroke-width="2"/>"##,
            pts.join(" ")
        )
        .unwrap();
    }

    for w in overlays.weather {
        let pts: Vec<String> = w
            .polygon
            .vertices()
            .iter()
            .map(|&p| {
                let (x, y) = m.map(p);
                format!("{},{}", fmt(x), fmt(y))
            })
            .collect();
        writeln!(
            s,
            r##"<polygon points="{}" fill="url(#hatch)" stroke="#b05050" stroke-width="1"/>"##,
            pts.join(" ")
        )
        .unwrap();
    }

    for flow in overlays.flows {
        let pts: Vec<String> = flow
            .points
            .iter()
            .map(|&p| {
                let (x, y) = m.map(p);
                format!("{},{}", fmt(x), fmt(y))
            })
            .collect();
        writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#4060c0" stroke-width="1.5" stroke-dasharray="6,3"/>"##,
            pts.join(" ")
        )
        .unwrap();
    }

    for cp in overlays.critical_points {
        let (x, y) = m.map(cp.position);
        writeln!(
            s,
            r##"<circle cx="{}" cy="{}" r="4" fill="#c04040"/>"##,
            fmt(x),
            fmt(y)
        )
        .unwrap();
    }

    for &(f, cost) in &overlays.costs {
        let poly = sub.face_polygon(f)?;
        let (x, y) = m.map(poly.centroid());
        writeln!(
            s,
            r##"<text x="{}" y="{}" font-family="monospace" font-size="14" text-anchor="middle">{}: {}</text>"##,
            fmt(x),
            fmt(y),
            sub.faces[f].name,
            fmt(cost)
        )
        .unwrap();
    }

    writeln!(s, "</svg>").unwrap();
    Ok(s)
}

pub fn render_to_file(
    sub: &PlanarSubdivision,
    overlays: &Overlays,
    path: &std::path::Path,
) -> Result<()> {
    let svg = render_svg(sub, overlays)?;
    std::fs::write(path, svg)?;
    Ok(())
}
