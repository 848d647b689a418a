//! End-to-end acceptance checks. Each test prints one pass/fail line.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use sectorize::config::RunConfig;
use sectorize::cost::{
    build_context, penalty, sector_cost, table_default_threshold, ConstraintSpec, EvalOptions,
};
use sectorize::geometry::{Point, Polygon};
use sectorize::scenario::clipped_track_length;
use sectorize::scenario::sweep_seed;
use sectorize::search::{candidate_vertex_positions, optimize, SearchConfig};
use sectorize::subdivision::{from_face_polygons, two_rectangles, PlanarSubdivision, VertexClass};
use sectorize::throughput::{build_cut_graph, flow_chord, lane_count, WeatherObstacle};
use sectorize::traffic::{
    capacity_welch, counts_at_time, CapacityMethod, Trajectory,
};

fn criterion<F: FnOnce() + std::panic::UnwindSafe>(n: u32, name: &str, f: F) {
    match std::panic::catch_unwind(f) {
        Ok(()) => println!("criterion {n} ({name}): PASS"),
        Err(e) => {
            println!("criterion {n} ({name}): FAIL");
            std::panic::resume_unwind(e);
        }
    }
}

fn spec(id: u8, t: f64, w: f64) -> ConstraintSpec {
    ConstraintSpec::from_table(id, t, w)
}

// ---------- 1: penalty branches ----------

#[test]
fn criterion_01_penalty_function() {
    criterion(1, "penalty function branches", || {
        for id in 1u8..=12 {
            let t = table_default_threshold(id).unwrap_or(8.0);
            let s = spec(id, t.max(1.0), 1.0);
            // exactly 1 at the threshold
            assert_eq!(penalty(s.threshold, &s), 1.0, "id {id} at threshold");
        }
        // feasible side is exactly 0
        assert_eq!(penalty(81.0, &spec(9, 80.0, 1.0)), 0.0);
        assert_eq!(penalty(100.0, &spec(9, 80.0, 1.0)), 0.0);
        assert_eq!(penalty(-5.0, &spec(3, 0.0, 1.0)), 0.0);
        assert_eq!(penalty(30.0, &spec(6, 45.0, 1.0)), 0.0);
        // bounded branch: midpoint of threshold and limit gives exactly 2
        let mid = |t: f64, l: f64| (t + l) / 2.0;
        assert_eq!(penalty(mid(80.0, 0.0), &spec(9, 80.0, 1.0)), 2.0);
        assert_eq!(penalty(mid(45.0, 90.0), &spec(6, 45.0, 1.0)), 2.0);
        assert_eq!(penalty(mid(180.0, 360.0), &spec(10, 180.0, 1.0)), 2.0);
        assert_eq!(penalty(mid(0.9, 0.0), &spec(11, 0.9, 1.0)), 2.0);
        // bounded branch diverges monotonically toward the limit
        let s9 = spec(9, 80.0, 1.0);
        let mut last = 1.0;
        for i in 1..=799 {
            let p = 80.0 - i as f64 * 0.1;
            let v = penalty(p, &s9);
            assert!(v >= last);
            last = v;
        }
        assert!(penalty(0.0, &s9).is_infinite());
    });
}

// ---------- 2: config defaults golden ----------

#[test]
fn criterion_02_table_defaults() {
    criterion(2, "config table defaults", || {
        let golden = "\
[thresholds]
t1 = unset
t2 = unset
t3 = 0
t4 = 2
t5 = 300
t6 = 45
t7 = 0.3
t8 = 0.4
t9 = 80
t10 = 180
t11 = 0.9
t12 = 0.4
[limits]
l1 = unbounded
l2 = unbounded
l3 = unbounded
l4 = 0
l5 = 0
l6 = 90
l7 = 0
l8 = 0
l9 = 0
l10 = 360
l11 = 0
l12 = 0
[weights]
w1 = 1
w2 = 1
w3 = 1
w4 = 1
w5 = 1
w6 = 1
w7 = 1
w8 = 1
w9 = 1
w10 = 1
w11 = 1
w12 = 1
[search]
move_radius = 0.4
move_step = 0.15
flip_length_factors = [0.5, 1, 1.5]
max_iterations = 10000
[evaluation]
capacity_method = map
lane_width_deg = 0.13
horizon_start_s = 0
horizon_end_s = 3600
nmi_per_deg = 60
slab_thickness_nmi = 6
";
        let cfg = RunConfig::from_toml_str("").unwrap();
        assert_eq!(cfg.dump(), golden);
    });
}

// ---------- 3: workload metric oracle ----------

struct OracleMetrics {
    ac_max: u32,
    ac_avg: f64,
    dwell_total: f64,
    delay: f64,
}

/// Dense-scan brute force: samples every dt, refines each containment flip by
/// bisection, then integrates the resulting step function exactly.
fn dense_oracle(
    sector: &Polygon,
    tracks: &[Trajectory],
    horizon: (f64, f64),
    dt: f64,
    capacity: f64,
) -> OracleMetrics {
    let mut events: Vec<(f64, i32)> = Vec::new();
    let mut dwell_total = 0.0;
    for tr in tracks {
        let (s0, s1) = tr.span();
        let lo = s0.max(horizon.0);
        let hi = s1.min(horizon.1);
        if hi <= lo {
            continue;
        }
        let inside = |t: f64| sector.contains(tr.position_at(t));
        let n = ((hi - lo) / dt).ceil() as usize;
        let mut crossings = Vec::new();
        let mut prev_t = lo;
        let mut prev_in = inside(lo);
        let first_in = prev_in;
        for i in 1..=n {
            let t = lo + (hi - lo) * i as f64 / n as f64;
            let now = inside(t);
            if now != prev_in {
                // bisect the flip to near-exact time
                let (mut a, mut b) = (prev_t, t);
                for _ in 0..60 {
                    let m = (a + b) / 2.0;
                    if inside(m) == prev_in {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                crossings.push((a + b) / 2.0);
                prev_in = now;
            }
            prev_t = t;
        }
        let mut state = first_in;
        let mut t_enter = if state { Some(lo) } else { None };
        if state {
            events.push((lo, 1));
        }
        for c in crossings {
            state = !state;
            if state {
                events.push((c, 1));
                t_enter = Some(c);
            } else {
                events.push((c, -1));
                dwell_total += c - t_enter.take().unwrap();
            }
        }
        if let Some(te) = t_enter {
            events.push((hi, -1));
            dwell_total += hi - te;
        }
    }
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(b.1.cmp(&a.1).reverse()));
    // exits before entries at equal times
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut ac_max = 0i32;
    let mut area = 0.0;
    let mut delay = 0.0;
    let mut count = 0i32;
    let mut t_prev = horizon.0;
    for (t, d) in events.iter().chain(std::iter::once(&(horizon.1, 0))) {
        let span = t - t_prev;
        area += count as f64 * span;
        delay += (count as f64 - capacity).max(0.0) * span;
        count += d;
        ac_max = ac_max.max(count);
        t_prev = *t;
    }
    OracleMetrics {
        ac_max: ac_max as u32,
        ac_avg: area / (horizon.1 - horizon.0),
        dwell_total,
        delay,
    }
}

fn random_strip_partition(rng: &mut ChaCha8Rng) -> PlanarSubdivision {
    let k = rng.gen_range(2..=4usize);
    let mut cuts: Vec<f64> = (0..k - 1).map(|_| rng.gen_range(0.15..0.85)).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut xs = vec![0.0];
    for &c in &cuts {
        if c - xs.last().unwrap() > 0.05 {
            xs.push(c);
        }
    }
    if 1.0 - xs.last().unwrap() < 0.05 {
        xs.pop();
    }
    xs.push(1.0);
    let faces: Vec<(String, Vec<Point>)> = xs
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            (
                format!("s{i}"),
                vec![
                    Point::new(w[0], 0.0),
                    Point::new(w[1], 0.0),
                    Point::new(w[1], 1.0),
                    Point::new(w[0], 1.0),
                ],
            )
        })
        .collect();
    from_face_polygons(&faces).unwrap()
}

fn random_tracks(rng: &mut ChaCha8Rng, max_flights: usize, horizon: f64) -> Vec<Trajectory> {
    let n = rng.gen_range(1..=max_flights);
    (0..n)
        .map(|i| {
            let a = Point::new(rng.gen_range(-0.3..1.3), rng.gen_range(-0.3..1.3));
            let b = Point::new(rng.gen_range(-0.3..1.3), rng.gen_range(-0.3..1.3));
            let t0 = rng.gen_range(0.0..horizon * 0.3);
            let t1 = t0 + rng.gen_range(horizon * 0.3..horizon * 0.7);
            Trajectory::new(&format!("f{i}"), vec![(t0, a), (t1, b)]).unwrap()
        })
        .collect()
}

#[test]
fn criterion_03_workload_oracle() {
    criterion(3, "workload metrics vs dense oracle", || {
        let mut rng = ChaCha8Rng::seed_from_u64(303);
        let horizon = (0.0, 100.0);
        for case in 0..50 {
            let sub = random_strip_partition(&mut rng);
            let tracks = random_tracks(&mut rng, 20, 100.0);
            for f in 0..sub.faces.len() {
                let sector = sub.face_polygon(f).unwrap();
                let profile =
                    sectorize::traffic::count_profile(&sector, &tracks, horizon).unwrap();
                let cap = 2.0;
                let dwells = sectorize::traffic::dwell_times(&sector, &tracks).unwrap();
                let delay = sectorize::traffic::estimated_delay(
                    &profile,
                    &sectorize::traffic::SectorCapacity {
                        value: cap,
                        method: CapacityMethod::Map,
                    },
                );
                let oracle = dense_oracle(&sector, &tracks, horizon, 0.01, cap);
                assert_eq!(
                    sectorize::traffic::ac_max(&profile),
                    oracle.ac_max,
                    "case {case} face {f} ac_max"
                );
                let avg = sectorize::traffic::ac_avg(&profile).unwrap();
                assert!(
                    (avg - oracle.ac_avg).abs() < 1e-3,
                    "case {case} face {f} ac_avg {avg} vs {}",
                    oracle.ac_avg
                );
                let dwell: f64 = dwells.iter().map(|d| d.1).sum();
                // the oracle clips dwell to the horizon; tracks end inside it
                assert!(
                    (dwell - oracle.dwell_total).abs() < 1e-3,
                    "case {case} face {f} dwell {dwell} vs {}",
                    oracle.dwell_total
                );
                assert!(
                    (delay - oracle.delay).abs() < 1e-3,
                    "case {case} face {f} delay {delay} vs {}",
                    oracle.delay
                );
            }
        }
    });
}

// ---------- 4: conservation ----------

#[test]
fn criterion_04_conservation() {
    criterion(4, "count conservation across sectors", || {
        let mut rng = ChaCha8Rng::seed_from_u64(404);
        for _ in 0..10 {
            let sub = random_strip_partition(&mut rng);
            let domain = sub.outer_boundary().unwrap();
            let tracks = random_tracks(&mut rng, 15, 100.0);
            for _ in 0..100 {
                let t = rng.gen_range(0.0..100.0);
                let per_sector = counts_at_time(&sub, &tracks, t);
                let total: u32 = per_sector.iter().sum();
                let in_domain = tracks
                    .iter()
                    .filter(|tr| {
                        let (s0, s1) = tr.span();
                        s0 <= t && t <= s1 && domain.contains(tr.position_at(t))
                    })
                    .count() as u32;
                assert_eq!(total, in_domain, "t = {t}");
            }
        }
    });
}

// ---------- 5: candidate grid ----------

#[test]
fn criterion_05_grid_size() {
    criterion(5, "36 vertex-move candidates", || {
        let sub = pinwheel();
        let cfg = SearchConfig::default();
        let interior: Vec<usize> = (0..sub.vertices.len())
            .filter(|&i| sub.classify_vertex(i) == VertexClass::Interior)
            .collect();
        assert!(!interior.is_empty());
        for &v in &interior {
            assert_eq!(candidate_vertex_positions(&sub, v, &cfg).len(), 36);
        }
    });
}

// ---------- 6: descent and termination ----------

#[test]
fn criterion_06_descent_terminates_locally_optimal() {
    criterion(6, "descent, termination, local optimality", || {
        let mut rng = ChaCha8Rng::seed_from_u64(606);
        let domain = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap();
        let specs = vec![
            spec(1, 0.2, 1.0),
            spec(2, 1.0, 1.0),
            spec(9, 80.0, 1.0),
            spec(10, 180.0, 1.0),
            spec(11, 0.9, 1.0),
            spec(12, 0.2, 1.0),
        ];
        let opts = EvalOptions { horizon: (0.0, 100.0), ..Default::default() };
        let cfg = SearchConfig { move_radius: 0.2, move_step: 0.07, ..Default::default() };
        for case in 0..20 {
            let tracks = random_tracks(&mut rng, 10, 100.0);
            let k = rng.gen_range(2..=3usize);
            let seeded = sweep_seed(&domain, &tracks, k, Point::new(1.0, 0.0)).unwrap();
            // perturb a sliding boundary vertex to unbalance the seed
            let mut perturbed = seeded.clone();
            let mut shifted = false;
            for v in 0..perturbed.vertices.len() {
                if matches!(perturbed.classify_vertex(v), VertexClass::BoundarySlide { .. }) {
                    let moved = perturbed.vertices[v] + Point::new(0.06, 0.0);
                    let old = perturbed.vertices[v];
                    perturbed.vertices[v] = moved;
                    if perturbed.validate().is_empty() {
                        shifted = true;
                    } else {
                        perturbed.vertices[v] = old;
                    }
                }
            }
            assert!(shifted || k == 1, "case {case}: no perturbable vertex");
            let cost_fn = |sub: &PlanarSubdivision, f: usize| {
                let ctx = build_context(sub, f, &tracks, &[], &[], &[], opts)?;
                Ok(sector_cost(&ctx, &specs)?.total)
            };
            let (out, log) = optimize(&perturbed, &cfg, cost_fn).unwrap();
            assert!(!log.truncated, "case {case} truncated");
            for e in &log.entries {
                assert!(
                    e.cost_after < e.cost_before,
                    "case {case}: non-improving acceptance {e:?}"
                );
            }
            let cost_fn2 = |sub: &PlanarSubdivision, f: usize| {
                let ctx = build_context(sub, f, &tracks, &[], &[], &[], opts)?;
                Ok(sector_cost(&ctx, &specs)?.total)
            };
            let (_, log2) = optimize(&out, &cfg, cost_fn2).unwrap();
            assert!(log2.entries.is_empty(), "case {case}: not locally optimal");
        }
    });
}

// ---------- 7: balance improvement ----------

#[test]
fn criterion_07_balance_two_rectangles() {
    criterion(7, "cut migrates toward traffic balance", || {
        let sub = two_rectangles(1.0, 0.2);
        let horizon = (0.0, 140.0);
        // uniform eastbound traffic across the whole domain
        let tracks: Vec<Trajectory> = (0..10)
            .map(|i| {
                let y = 0.05 + 0.09 * i as f64 + 0.003;
                Trajectory::new(
                    &format!("f{i}"),
                    vec![
                        (0.0, Point::new(-0.2, y)),
                        (140.0, Point::new(1.2, y)),
                    ],
                )
                .unwrap()
            })
            .collect();
        let specs = vec![spec(1, 0.1, 1.0)];
        let opts = EvalOptions { horizon, ..Default::default() };
        let cfg = SearchConfig::default();
        let avg_for = |poly: &Polygon| {
            let profile = sectorize::traffic::count_profile(poly, &tracks, horizon).unwrap();
            sectorize::traffic::ac_avg(&profile).unwrap()
        };
        let imbalance_at_cut = |x: f64| {
            let west = Polygon::new(vec![
                Point::new(0.0, 0.0),
                Point::new(x, 0.0),
                Point::new(x, 1.0),
                Point::new(0.0, 1.0),
            ])
            .unwrap();
            let east = Polygon::new(vec![
                Point::new(x, 0.0),
                Point::new(1.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(x, 1.0),
            ])
            .unwrap();
            (avg_for(&west) - avg_for(&east)).abs()
        };
        // exhaustive oracle over the reachable straight-cut lattice
        let mut best = (f64::INFINITY, 0.0);
        let mut x = 0.2_f64;
        let step = cfg.move_step / 2.0; // lattice pitch of the staggered grid
        while x > 0.05 {
            x -= step;
        }
        let mut probe = x;
        while probe < 0.95 {
            if probe > 0.05 {
                let im = imbalance_at_cut(probe);
                if im < best.0 {
                    best = (im, probe);
                }
            }
            probe += step;
        }
        let one_step_bound = imbalance_at_cut((best.1 + step).min(0.95)) + 1e-9;

        let cost_fn = |s: &PlanarSubdivision, f: usize| {
            let ctx = build_context(s, f, &tracks, &[], &[], &[], opts)?;
            Ok(sector_cost(&ctx, &specs)?.total)
        };
        let (out, log) = optimize(&sub, &cfg, cost_fn).unwrap();
        assert!(!log.entries.is_empty(), "no adjustments accepted");
        let a0 = {
            let p = out.face_polygon(0).unwrap();
            avg_for(&p)
        };
        let a1 = {
            let p = out.face_polygon(1).unwrap();
            avg_for(&p)
        };
        let achieved = (a0 - a1).abs();
        assert!(
            achieved <= one_step_bound,
            "imbalance {achieved} worse than one-step bound {one_step_bound} (optimum {} at {})",
            best.0,
            best.1
        );
    });
}

// ---------- 8: pinwheel pathology ----------

fn pinwheel() -> PlanarSubdivision {
    // four convex blades spiralling from the domain corners into a central
    // square hub; the only movable vertices are the hub corners
    let p = Point::new;
    let rot = |pts: &[Point]| -> Vec<Point> { pts.iter().map(|q| p(4.0 - q.y, q.x)).collect() };
    let b1 = vec![p(0.0, 0.0), p(4.0, 0.0), p(2.5, 1.5), p(1.5, 1.5)];
    let b2 = rot(&b1);
    let b3 = rot(&b2);
    let b4 = rot(&b3);
    let hub = vec![p(1.5, 1.5), p(2.5, 1.5), p(2.5, 2.5), p(1.5, 2.5)];
    from_face_polygons(&[
        ("b1".into(), b1),
        ("b2".into(), b2),
        ("b3".into(), b3),
        ("b4".into(), b4),
        ("hub".into(), hub),
    ])
    .unwrap()
}

#[test]
fn criterion_08_pinwheel_local_minimum() {
    criterion(8, "pinwheel stuck under convexity pressure", || {
        let sub = pinwheel();
        assert!(sub.validate().is_empty());
        for f in 0..5 {
            let poly = sub.face_polygon(f).unwrap();
            let ratio = sectorize::geometry::convexity_ratio(&poly).unwrap();
            assert!(ratio > 1.0 - 1e-9, "face {f} ratio {ratio}");
        }
        // hovering traffic: opposite blades loaded unevenly, all aircraft far
        // beyond the reach of the candidate grid from any movable boundary
        let hover = |id: &str, x: f64, y: f64| {
            Trajectory::new(id, vec![(0.0, Point::new(x, y)), (100.0, Point::new(x, y))]).unwrap()
        };
        let mut tracks = vec![hover("a1", 2.0, 0.3), hover("a3", 2.0, 3.7)];
        for i in 0..3 {
            tracks.push(hover(&format!("b2-{i}"), 3.6, 1.8 + 0.2 * i as f64));
            tracks.push(hover(&format!("b4-{i}"), 0.4, 1.8 + 0.2 * i as f64));
        }
        // workload pressure plus a convexity weight high enough to forbid
        // any nonconvex reshaping
        let specs = vec![spec(1, 0.1, 1.0), spec(11, 0.9999, 1e6)];
        let cfg = SearchConfig::default();
        let opts = EvalOptions { horizon: (0.0, 100.0), ..Default::default() };
        let cost_fn = |s: &PlanarSubdivision, f: usize| {
            let ctx = build_context(s, f, &tracks, &[], &[], &[], opts)?;
            Ok(sector_cost(&ctx, &specs)?.total)
        };
        let (out, log) = optimize(&sub, &cfg, cost_fn).unwrap();
        assert!(
            log.entries.is_empty(),
            "expected a stuck local minimum, got {} adjustments",
            log.entries.len()
        );
        // the imbalance that cannot be fixed is still visible in the costs
        let max = log.final_costs.iter().cloned().fold(f64::MIN, f64::max);
        let min = log.final_costs.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max > min + 1.0);
        assert_eq!(out.vertices, sub.vertices);
    });
}

// ---------- 9: sweep-line oracle ----------

#[test]
fn criterion_09_sweep_balance_oracle() {
    criterion(9, "sweep slabs balance clipped length", || {
        let mut rng = ChaCha8Rng::seed_from_u64(909);
        for case in 0..15 {
            // random convex domain: hull of random points
            let raw: Vec<Point> = (0..12)
                .map(|_| Point::new(rng.gen_range(0.0..4.0), rng.gen_range(0.0..4.0)))
                .collect();
            let domain = match sectorize::geometry::convex_hull(&raw) {
                Ok(h) => h,
                Err(_) => continue,
            };
            let tracks = random_tracks(&mut rng, 12, 100.0)
                .into_iter()
                .map(|t| {
                    // scale unit-square tracks up to the domain extent
                    let samples: Vec<(f64, Point)> = t
                        .samples
                        .iter()
                        .map(|&(ts, p)| (ts, Point::new(p.x * 4.0, p.y * 4.0)))
                        .collect();
                    Trajectory::new(&t.flight_id, samples).unwrap()
                })
                .collect::<Vec<_>>();
            let total = clipped_track_length(&domain, &tracks);
            if total < 1e-6 {
                continue;
            }
            let k = rng.gen_range(2..=5usize);
            let angle: f64 = rng.gen_range(0.0..std::f64::consts::PI);
            let dir = Point::new(angle.cos(), angle.sin());
            let seeded = match sweep_seed(&domain, &tracks, k, dir) {
                Ok(s) => s,
                Err(e) => panic!("case {case}: {e}"),
            };
            assert_eq!(seeded.faces.len(), k);
            for f in 0..k {
                let poly = seeded.face_polygon(f).unwrap();
                // independent re-clipping of tracks against the slab polygon
                let share = clipped_track_length(&poly, &tracks);
                assert!(
                    (share - total / k as f64).abs() <= 1e-6 * total,
                    "case {case} slab {f}: {share} vs {}",
                    total / k as f64
                );
            }
        }
    });
}

// ---------- 10: throughput brute force ----------

fn oracle_lanes(sector: &Polygon, flow: &[Point], obstacles: &[Vec<Point>], lane: f64) -> u64 {
    let chord = flow_chord(sector, flow).unwrap();
    let graph = build_cut_graph(sector, &chord, obstacles);
    let n = graph.nodes.len();
    let lanes_of = |w: f64| (w / lane + 1e-9).floor() as u64;
    // exhaustive enumeration of simple paths from the left bank (0) to the
    // right bank (1)
    let mut best = u64::MAX;
    let mut stack = vec![(0usize, vec![false; n], 0u64)];
    while let Some((node, mut seen, acc)) = stack.pop() {
        seen[node] = true;
        if node == 1 {
            best = best.min(acc);
            continue;
        }
        for next in 0..n {
            if seen[next] {
                continue;
            }
            let w = graph.clearance(node, next);
            stack.push((next, seen.clone(), acc + lanes_of(w)));
        }
    }
    best
}

#[test]
fn criterion_10_throughput_brute_force() {
    criterion(10, "lane count vs exhaustive paths", || {
        let sector = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap();
        let flow = vec![Point::new(-0.5, 0.5), Point::new(2.5, 0.5)];
        let lane = 0.1;
        let horizon = (0.0, 1.0);
        let obstacle = |cx: f64, cy: f64, r: f64| -> Vec<Point> {
            vec![
                Point::new(cx - r, cy - r),
                Point::new(cx + r, cy - r),
                Point::new(cx + r, cy + r),
                Point::new(cx - r, cy + r),
            ]
        };
        let fixtures: Vec<Vec<Vec<Point>>> = vec![
            vec![],
            vec![obstacle(1.0, 0.5, 0.1)],
            vec![obstacle(0.7, 0.3, 0.12), obstacle(1.3, 0.7, 0.12)],
            vec![obstacle(0.5, 0.5, 0.1), obstacle(1.0, 0.2, 0.08), obstacle(1.5, 0.8, 0.1)],
            vec![
                obstacle(0.4, 0.25, 0.08),
                obstacle(0.8, 0.55, 0.08),
                obstacle(1.2, 0.35, 0.08),
                obstacle(1.6, 0.75, 0.08),
            ],
        ];
        for (i, obs) in fixtures.iter().enumerate() {
            let weather: Vec<WeatherObstacle> = obs
                .iter()
                .map(|ring| WeatherObstacle {
                    polygon: Polygon::new(ring.clone()).unwrap(),
                    active: None,
                })
                .collect();
            let got = lane_count(&sector, &flow, &weather, lane, horizon)
                .unwrap()
                .unwrap();
            let want = oracle_lanes(&sector, &flow, obs, lane);
            assert_eq!(got, want, "fixture {i}");
        }
        // obstacle monotonicity on random instances
        let mut rng = ChaCha8Rng::seed_from_u64(1010);
        for case in 0..100 {
            let count = rng.gen_range(1..=3usize);
            let obs: Vec<WeatherObstacle> = (0..count)
                .map(|_| {
                    let cx = rng.gen_range(0.3..1.7);
                    let cy = rng.gen_range(0.2..0.8);
                    let r = rng.gen_range(0.04..0.15);
                    WeatherObstacle {
                        polygon: Polygon::new(obstacle(cx, cy, r)).unwrap(),
                        active: None,
                    }
                })
                .collect();
            let full = lane_count(&sector, &flow, &obs, lane, horizon).unwrap().unwrap();
            for drop in 0..count {
                let fewer: Vec<WeatherObstacle> = obs
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != drop)
                    .map(|(_, o)| o.clone())
                    .collect();
                let reduced = lane_count(&sector, &flow, &fewer, lane, horizon)
                    .unwrap()
                    .unwrap();
                assert!(
                    full <= reduced,
                    "case {case}: adding an obstacle raised lanes {reduced} -> {full}"
                );
            }
        }
    });
}

// ---------- 11: Welch capacity behavior ----------

#[test]
fn criterion_11_welch_fallback() {
    criterion(11, "Welch root analysis and fallback", || {
        let volume = 60_000.0;
        let dwell_s = 600.0;
        // quadratic-root oracle: aK^2 + bK + c with a, b, c all positive has
        // no positive root (root sum -b/a < 0, product c/a > 0)
        let a = 6.8 / volume;
        let b = a + 0.025 + 7.0 / dwell_s;
        let c = 0.7;
        assert!(a > 0.0 && b > 0.0 && c > 0.0);
        let disc: f64 = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let root = (-b + disc.sqrt()) / (2.0 * a);
            assert!(root <= 0.0, "unexpected positive root {root}");
        }
        let cap = capacity_welch(volume, dwell_s).unwrap();
        assert_eq!(cap.method, CapacityMethod::WelchFallback);
        // whenever a positive root exists, it must satisfy the quadratic;
        // sweep a broad parameter range checking both sides
        for &v in &[100.0, 1_000.0, 60_000.0, 1e6, 1e9] {
            for &t in &[30.0, 120.0, 600.0, 3600.0] {
                let cap = capacity_welch(v, t).unwrap();
                if cap.method == CapacityMethod::Welch {
                    let a = 6.8 / v;
                    let b = a + 0.025 + 7.0 / t;
                    let k = cap.value;
                    assert!((a * k * k + b * k + c).abs() < 1e-9);
                }
            }
        }
    });
}

// ---------- 12: CLI determinism ----------

#[test]
fn criterion_12_cli_determinism() {
    criterion(12, "byte-identical repeated runs", || {
        let bin = env!("CARGO_BIN_EXE_sectorize");
        let dir = tempfile::tempdir().unwrap();
        let gen = dir.path().join("gen");
        let run = |args: &[&str]| {
            let out = std::process::Command::new(bin).args(args).output().unwrap();
            assert!(
                out.status.success(),
                "{args:?}: {}",
                String::from_utf8_lossy(&out.stderr)
            );
        };
        run(&["generate", "--seed", "11", "--out-dir", gen.to_str().unwrap()]);
        let seed_dir = dir.path().join("seed");
        run(&[
            "seed-sweep",
            "--sectors",
            gen.join("domain.json").to_str().unwrap(),
            "--tracks",
            gen.join("tracks.csv").to_str().unwrap(),
            "--count",
            "3",
            "--out-dir",
            seed_dir.to_str().unwrap(),
        ]);
        let optimize_into = |out_dir: &std::path::Path| {
            run(&[
                "optimize",
                "--sectors",
                seed_dir.join("seed.json").to_str().unwrap(),
                "--tracks",
                gen.join("tracks.csv").to_str().unwrap(),
                "--critical-points",
                gen.join("critical_points.json").to_str().unwrap(),
                "--weather",
                gen.join("weather.json").to_str().unwrap(),
                "--out-dir",
                out_dir.to_str().unwrap(),
                "--svg",
            ]);
        };
        let run1 = dir.path().join("run1");
        let run2 = dir.path().join("run2");
        optimize_into(&run1);
        optimize_into(&run2);
        for file in [
            "optimized.json",
            "report_before.csv",
            "report_after.csv",
            "log.json",
            "before.svg",
            "after.svg",
        ] {
            let a = std::fs::read(run1.join(file)).unwrap();
            let b = std::fs::read(run2.join(file)).unwrap();
            assert_eq!(a, b, "{file} differs between runs");
        }
        // after-cost max must not exceed before-cost max
        let before = sectorize::formats::load_report_totals(&run1.join("report_before.csv")).unwrap();
        let after = sectorize::formats::load_report_totals(&run1.join("report_after.csv")).unwrap();
        let max = |v: &[(String, f64)]| v.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
        assert!(max(&after) <= max(&before) + 1e-9);
    });
}
