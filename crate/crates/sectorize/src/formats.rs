//! On-disk formats: sectorization JSON, track CSV, overlay JSON documents
//! (flows, critical points, weather), and the cost-report CSV.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cost::CostReport;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scenario::{CriticalPoint, Flow};
use crate::subdivision::{Edge, Face, PlanarSubdivision};
use crate::throughput::WeatherObstacle;
use crate::traffic::Trajectory;

fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse { path: path.display().to_string(), message: message.into() }
}

// ---------- sectorization ----------

#[derive(Debug, Serialize, Deserialize)]
struct VertexRecord {
    id: usize,
    x: f64,
    y: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRecord {
    id: usize,
    v1: usize,
    v2: usize,
    outer: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct FaceRecord {
    id: usize,
    name: String,
    #[serde(rename = "loop")]
    ring: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SectorizationDoc {
    vertices: Vec<VertexRecord>,
    edges: Vec<EdgeRecord>,
    faces: Vec<FaceRecord>,
}

pub fn load_sectorization(path: &Path) -> Result<PlanarSubdivision> {
    let text = std::fs::read_to_string(path)?;
    let doc: SectorizationDoc =
        serde_json::from_str(&text).map_err(|e| parse_err(path, e.to_string()))?;
    let n = doc.vertices.len();
    let mut vertices = vec![None; n];
    for v in &doc.vertices {
        if v.id >= n {
            return Err(parse_err(path, format!("vertex id {} out of range 0..{n}", v.id)));
        }
        if vertices[v.id].replace(Point::new(v.x, v.y)).is_some() {
            return Err(parse_err(path, format!("duplicate vertex id {}", v.id)));
        }
    }
    let vertices: Vec<Point> = vertices.into_iter().map(|v| v.unwrap()).collect();
    let mut edges = Vec::with_capacity(doc.edges.len());
    for (i, e) in doc.edges.iter().enumerate() {
        if e.id != i {
            return Err(parse_err(path, format!("edge ids must be sequential; got {} at {i}", e.id)));
        }
        if e.v1 >= n || e.v2 >= n {
            return Err(parse_err(path, format!("edge {} references unknown vertex", e.id)));
        }
        edges.push(Edge { a: e.v1, b: e.v2, outer: e.outer });
    }
    let mut faces = Vec::with_capacity(doc.faces.len());
    for (i, f) in doc.faces.iter().enumerate() {
        if f.id != i {
            return Err(parse_err(path, format!("face ids must be sequential; got {} at {i}", f.id)));
        }
        if f.ring.iter().any(|&v| v >= n) {
            return Err(parse_err(path, format!("face {} references unknown vertex", f.id)));
        }
        faces.push(Face { name: f.name.clone(), ring: f.ring.clone() });
    }
    let sub = PlanarSubdivision { vertices, edges, faces };
    let violations = sub.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidSubdivision(violations));
    }
    Ok(sub)
}

pub fn save_sectorization(sub: &PlanarSubdivision, path: &Path) -> Result<()> {
    let doc = SectorizationDoc {
        vertices: sub
            .vertices
            .iter()
            .enumerate()
            .map(|(id, p)| VertexRecord { id, x: p.x, y: p.y })
            .collect(),
        edges: sub
            .edges
            .iter()
            .enumerate()
            .map(|(id, e)| EdgeRecord { id, v1: e.a, v2: e.b, outer: e.outer })
            .collect(),
        faces: sub
            .faces
            .iter()
            .enumerate()
            .map(|(id, f)| FaceRecord { id, name: f.name.clone(), ring: f.ring.clone() })
            .collect(),
    };
    std::fs::write(path, serde_json::to_string_pretty(&doc)? + "\n")?;
    Ok(())
}

// ---------- tracks ----------

pub fn load_tracks(path: &Path) -> Result<Vec<Trajectory>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| parse_err(path, e.to_string()))?;
    {
        let headers = rdr.headers().map_err(|e| parse_err(path, e.to_string()))?;
        let expected = ["flight_id", "time_s", "lon_deg", "lat_deg"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(parse_err(
                path,
                format!("expected header {}, got {headers:?}", expected.join(",")),
            ));
        }
    }
    let mut by_flight: std::collections::BTreeMap<String, Vec<(f64, Point)>> =
        std::collections::BTreeMap::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(path, e.to_string()))?;
        let line = row + 2;
        if rec.len() != 4 {
            return Err(parse_err(path, format!("line {line}: expected 4 fields")));
        }
        let field = |i: usize, name: &str| -> Result<f64> {
            rec[i]
                .trim()
                .parse::<f64>()
                .map_err(|_| parse_err(path, format!("line {line}: bad {name} '{}'", &rec[i])))
        };
        let t = field(1, "time_s")?;
        let x = field(2, "lon_deg")?;
        let y = field(3, "lat_deg")?;
        let samples = by_flight.entry(rec[0].to_string()).or_default();
        if samples.iter().any(|&(ts, _)| ts == t) {
            return Err(parse_err(
                path,
                format!("line {line}: duplicate time {t} for flight {}", &rec[0]),
            ));
        }
        samples.push((t, Point::new(x, y)));
    }
    let mut out = Vec::with_capacity(by_flight.len());
    for (flight, mut samples) in by_flight {
        samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        out.push(Trajectory::new(&flight, samples)?);
    }
    Ok(out)
}

pub fn save_tracks(tracks: &[Trajectory], path: &Path) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path).map_err(|e| parse_err(path, e.to_string()))?;
    wtr.write_record(["flight_id", "time_s", "lon_deg", "lat_deg"])
        .map_err(|e| parse_err(path, e.to_string()))?;
    for t in tracks {
        for &(ts, p) in &t.samples {
            wtr.write_record([
                t.flight_id.as_str(),
                &ts.to_string(),
                &p.x.to_string(),
                &p.y.to_string(),
            ])
            .map_err(|e| parse_err(path, e.to_string()))?;
        }
    }
    wtr.flush()?;
    Ok(())
}

// ---------- overlays ----------

#[derive(Debug, Serialize, Deserialize)]
struct FlowsDoc {
    flows: Vec<Flow>,
}

pub fn load_flows(path: &Path) -> Result<Vec<Flow>> {
    let text = std::fs::read_to_string(path)?;
    let doc: FlowsDoc = serde_json::from_str(&text).map_err(|e| parse_err(path, e.to_string()))?;
    for f in &doc.flows {
        if f.points.len() < 2 {
            return Err(parse_err(path, format!("flow '{}' needs at least 2 points", f.name)));
        }
    }
    Ok(doc.flows)
}

pub fn save_flows(flows: &[Flow], path: &Path) -> Result<()> {
    let doc = FlowsDoc { flows: flows.to_vec() };
    std::fs::write(path, serde_json::to_string_pretty(&doc)? + "\n")?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct CriticalPointsDoc {
    critical_points: Vec<CriticalPoint>,
}

pub fn load_critical_points(path: &Path) -> Result<Vec<CriticalPoint>> {
    let text = std::fs::read_to_string(path)?;
    let doc: CriticalPointsDoc =
        serde_json::from_str(&text).map_err(|e| parse_err(path, e.to_string()))?;
    Ok(doc.critical_points)
}

pub fn save_critical_points(cps: &[CriticalPoint], path: &Path) -> Result<()> {
    let doc = CriticalPointsDoc { critical_points: cps.to_vec() };
    std::fs::write(path, serde_json::to_string_pretty(&doc)? + "\n")?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct WeatherDoc {
    weather: Vec<WeatherRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WeatherRecord {
    polygon: Vec<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    active: Option<(f64, f64)>,
}

pub fn load_weather(path: &Path) -> Result<Vec<WeatherObstacle>> {
    let text = std::fs::read_to_string(path)?;
    let doc: WeatherDoc =
        serde_json::from_str(&text).map_err(|e| parse_err(path, e.to_string()))?;
    doc.weather
        .into_iter()
        .map(|r| {
            let poly = crate::geometry::Polygon::new(r.polygon)
                .map_err(|e| parse_err(path, format!("bad weather polygon: {e}")))?;
            Ok(WeatherObstacle { polygon: poly, active: r.active })
        })
        .collect()
}

pub fn save_weather(weather: &[WeatherObstacle], path: &Path) -> Result<()> {
    let doc = WeatherDoc {
        weather: weather
            .iter()
            .map(|w| WeatherRecord { polygon: w.polygon.vertices().to_vec(), active: w.active })
            .collect(),
    };
    std::fs::write(path, serde_json::to_string_pretty(&doc)? + "\n")?;
    Ok(())
}

// ---------- cost report ----------

/// Writes per-sector cost reports as CSV with one row per constraint plus a
/// total row. Values join with ';' inside one field.
pub fn save_cost_report(reports: &[(String, CostReport)], path: &Path) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path).map_err(|e| parse_err(path, e.to_string()))?;
    wtr.write_record(["sector", "constraint", "values", "penalty", "weight", "weighted"])
        .map_err(|e| parse_err(path, e.to_string()))?;
    for (name, report) in reports {
        for row in &report.rows {
            let values: Vec<String> = row.values.iter().map(|v| v.to_string()).collect();
            wtr.write_record([
                name.as_str(),
                &row.id.to_string(),
                &values.join(";"),
                &row.penalty.to_string(),
                &row.weight.to_string(),
                &row.weighted.to_string(),
            ])
            .map_err(|e| parse_err(path, e.to_string()))?;
        }
        wtr.write_record([name.as_str(), "total", "", "", "", &report.total.to_string()])
            .map_err(|e| parse_err(path, e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads back the per-sector totals from a cost-report CSV.
pub fn load_report_totals(path: &Path) -> Result<Vec<(String, f64)>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| parse_err(path, e.to_string()))?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| parse_err(path, e.to_string()))?;
        if &rec[1] == "total" {
            let total = rec[5]
                .parse::<f64>()
                .map_err(|_| parse_err(path, format!("bad total '{}'", &rec[5])))?;
            out.push((rec[0].to_string(), total));
        }
    }
    Ok(out)
}
