//! Balanced synthetic pair generation.
//!
//! Each class is produced by a dedicated construction that places geometries
//! so the relation holds with a safety margin, then every candidate is
//! re-labeled by the independent predicates before it is accepted. The
//! constructions are heuristics; the predicates are the authority.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    class_count, dir_label, dist_label, topo_classes, topo_label, Dataset, PairSample, PairType,
    Split, Task, TaskError, TopoClass, DIRECTION_CLASSES,
};
use crate::geometry::{
    centroid, coord_bounds, point_in_polygon, segments_intersect, translate, validate, Geometry,
    Point2, Polygon, Region,
};

/// Rejection-sampling budget per pair before generation gives up.
pub const ATTEMPTS_PER_PAIR: usize = 1000;

/// Minimum clearance kept between geometries that must not touch, and the
/// margin kept away from class boundaries, so float noise cannot flip a
/// label.
const MARGIN: f64 = 1e-3;

/// Class separation for the topology strata whose distinction is a distance
/// threshold (disjoint vs. touching/containing): disjoint geometries stay at
/// least this far apart, and contained points this deep inside (capped by
/// the kernel-disc radius for small polygons). Keeps the synthetic classes
/// separated by a band instead of adversarially straddling the boundary.
const SEPARATION: f64 = 0.08;

/// All generated coordinates stay inside this square.
const BOUND: f64 = 1.0;

/// What to generate.
#[derive(Debug, Clone)]
pub struct GenSpec {
    pub task: Task,
    pub pair_type: PairType,
    pub per_class: usize,
    pub seed: u64,
    /// Hash of the run configuration, echoed into the dataset header.
    pub config_hash: String,
}

/// Generate a balanced, stratified, deterministic dataset.
///
/// Every pair gets its own RNG stream derived from `(seed, pair index)`, so
/// the output is reproducible regardless of how many attempts other pairs
/// consumed. Within each class the first 60% of pairs are the train split,
/// the next 20% validation, the rest test.
pub fn gen_pairs(spec: &GenSpec) -> Result<Dataset, TaskError> {
    if spec.per_class == 0 {
        return Err(TaskError::EmptyInput);
    }
    if spec.task == Task::Topology && topo_classes(spec.pair_type).is_none() {
        return Err(TaskError::UnsupportedPair(format!(
            "topology task is undefined for {}",
            spec.pair_type
        )));
    }
    // (class index, per-class count); distance is one unlabeled stratum
    // sized to match a two-class topology set.
    let strata: Vec<(usize, usize)> = match spec.task {
        Task::Topology => (0..class_count(Task::Topology, spec.pair_type))
            .map(|c| (c, spec.per_class))
            .collect(),
        Task::Direction => (0..DIRECTION_CLASSES).map(|c| (c, spec.per_class)).collect(),
        Task::Distance => vec![(0, 2 * spec.per_class)],
    };

    let mut pairs = Vec::new();
    let mut global_idx: u64 = 0;
    for &(class, count) in &strata {
        for i in 0..count {
            // Odd multiplier, so distinct indices map to distinct streams.
            let stream = spec
                .seed
                .wrapping_add(global_idx.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut rng = ChaCha8Rng::seed_from_u64(stream);
            let pair = generate_one(spec, class, &mut rng).ok_or_else(|| {
                TaskError::GenerationBudgetExceeded {
                    class: stratum_name(spec, class),
                    attempts: ATTEMPTS_PER_PAIR,
                }
            })?;
            let (a, b) = pair;
            let mut sample = PairSample {
                a,
                b,
                topo: None,
                dir: None,
                dist: None,
                split: split_for(i, count),
            };
            match spec.task {
                Task::Topology => sample.topo = Some(class as u8),
                Task::Direction => sample.dir = Some(class as u8),
                Task::Distance => sample.dist = Some(dist_label(&sample.a, &sample.b)),
            }
            pairs.push(sample);
            global_idx += 1;
        }
    }
    Ok(Dataset {
        task: spec.task,
        pair_type: spec.pair_type,
        per_class: spec.per_class,
        seed: spec.seed,
        config_hash: spec.config_hash.clone(),
        pairs,
    })
}

fn stratum_name(spec: &GenSpec, class: usize) -> String {
    match spec.task {
        Task::Topology => topo_classes(spec.pair_type).unwrap()[class].name().into(),
        Task::Direction => super::DIRECTION_NAMES[class].into(),
        Task::Distance => "distance".into(),
    }
}

fn split_for(i: usize, n: usize) -> Split {
    let train = n * 6 / 10;
    let val = n * 2 / 10;
    if i < train {
        Split::Train
    } else if i < train + val {
        Split::Val
    } else {
        Split::Test
    }
}

/// Construct candidates until one passes validity, bounds, and the
/// independent label predicate for `class`.
fn generate_one(
    spec: &GenSpec,
    class: usize,
    rng: &mut ChaCha8Rng,
) -> Option<(Geometry, Geometry)> {
    for _ in 0..ATTEMPTS_PER_PAIR {
        let cand = match spec.task {
            Task::Topology => {
                let target = topo_classes(spec.pair_type).unwrap()[class];
                attempt_topo(spec.pair_type, target, rng)
            }
            Task::Direction => attempt_direction(spec.pair_type, class, rng),
            Task::Distance => attempt_distance(spec.pair_type, rng),
        };
        let Some((a, b)) = cand else { continue };
        if !(in_bounds(&a) && in_bounds(&b)) {
            continue;
        }
        if validate(&a).is_err() || validate(&b).is_err() {
            continue;
        }
        let ok = match spec.task {
            Task::Topology => {
                let target = topo_classes(spec.pair_type).unwrap()[class];
                topo_label(&a, &b).map_or(false, |l| l == target)
            }
            Task::Direction => dir_label(&a, &b).map_or(false, |l| l as usize == class),
            Task::Distance => dist_label(&a, &b) > 0.0,
        };
        if ok {
            return Some((a, b));
        }
    }
    None
}

fn in_bounds(g: &Geometry) -> bool {
    let (x0, y0, x1, y1) = coord_bounds(g);
    x0 >= -BOUND && y0 >= -BOUND && x1 <= BOUND && y1 <= BOUND
}

// ---------------------------------------------------------------------------
// Samplers for the synthetic geometry families.

fn rand_point(rng: &mut ChaCha8Rng) -> Point2 {
    Point2::new(rng.gen_range(-0.85..0.85), rng.gen_range(-0.85..0.85))
}

/// Random walk polyline with 2..=6 vertices kept inside the bounds.
fn sample_polyline(rng: &mut ChaCha8Rng) -> Vec<Point2> {
    let nv = rng.gen_range(2..=6usize);
    let mut pts = vec![rand_point(rng)];
    while pts.len() < nv {
        let last = *pts.last().unwrap();
        let mut placed = false;
        for _ in 0..32 {
            let ang = rng.gen_range(0.0..std::f64::consts::TAU);
            let len = rng.gen_range(0.1..0.4);
            let cand = Point2::new(last.x + len * ang.cos(), last.y + len * ang.sin());
            if cand.x.abs() <= 0.95 && cand.y.abs() <= 0.95 {
                pts.push(cand);
                placed = true;
                break;
            }
        }
        if !placed {
            break;
        }
    }
    pts
}

/// A star-shaped polygon sample with its construction parameters, which the
/// class constructions reuse to place things relative to it.
struct PolySample {
    pg: Polygon,
    center: Point2,
    r_lo: f64,
    r_hi: f64,
}

impl PolySample {
    fn geom(&self) -> Geometry {
        Geometry::Polygon(self.pg.clone())
    }
}

/// Sorted vertex angles with bounded circular gaps, so the ring is simple
/// and the center is well inside: every gap in [0.08, 2.4] radians keeps a
/// kernel disc of radius at least cos(1.2) ≈ 0.36 times the inner radius.
fn star_angles(rng: &mut ChaCha8Rng, nv: usize, forced: Option<f64>) -> Vec<f64> {
    loop {
        let mut angles: Vec<f64> = Vec::with_capacity(nv);
        if let Some(f) = forced {
            angles.push(f.rem_euclid(std::f64::consts::TAU));
        }
        while angles.len() < nv {
            angles.push(rng.gen_range(0.0..std::f64::consts::TAU));
        }
        angles.sort_by(f64::total_cmp);
        let gap_ok = |g: f64| (0.08..=2.4).contains(&g);
        let ok = angles.windows(2).all(|w| gap_ok(w[1] - w[0]))
            && gap_ok(angles[0] + std::f64::consts::TAU - angles[nv - 1]);
        if ok {
            return angles;
        }
    }
}

fn star_ring(
    rng: &mut ChaCha8Rng,
    center: Point2,
    r_lo: f64,
    r_hi: f64,
    nv: usize,
    forced: Option<(f64, Point2)>,
) -> Vec<Point2> {
    let angles = star_angles(rng, nv, forced.map(|(a, _)| a));
    let mut ring: Vec<Point2> = angles
        .iter()
        .map(|&ang| {
            if let Some((fa, fp)) = forced {
                if ang == fa.rem_euclid(std::f64::consts::TAU) {
                    return fp;
                }
            }
            let r = rng.gen_range(r_lo..=r_hi);
            Point2::new(center.x + r * ang.cos(), center.y + r * ang.sin())
        })
        .collect();
    ring.push(ring[0]);
    ring
}

fn sample_polygon(rng: &mut ChaCha8Rng) -> PolySample {
    let nv = rng.gen_range(4..=12usize);
    let r_hi = rng.gen_range(0.15..0.35);
    let r_lo = r_hi * rng.gen_range(0.55..0.9);
    let lim = 0.98 - r_hi;
    let center = Point2::new(rng.gen_range(-lim..lim), rng.gen_range(-lim..lim));
    let ring = star_ring(rng, center, r_lo, r_hi, nv, None);
    PolySample {
        pg: Polygon {
            exterior: ring,
            holes: vec![],
        },
        center,
        r_lo,
        r_hi,
    }
}

fn sample_kind(kind: GeomKind, rng: &mut ChaCha8Rng) -> Geometry {
    match kind {
        GeomKind::Point => Geometry::Point(rand_point(rng)),
        GeomKind::Polyline => Geometry::Polyline(sample_polyline(rng)),
        GeomKind::Polygon => sample_polygon(rng).geom(),
    }
}

#[derive(Clone, Copy)]
enum GeomKind {
    Point,
    Polyline,
    Polygon,
}

fn pair_kinds(pt: PairType) -> (GeomKind, GeomKind) {
    use GeomKind::*;
    match pt {
        PairType::PointPoint => (Point, Point),
        PairType::PointPolyline => (Point, Polyline),
        PairType::PointPolygon => (Point, Polygon),
        PairType::PolylinePolyline => (Polyline, Polyline),
        PairType::PolylinePolygon => (Polyline, Polygon),
        PairType::PolygonPolygon => (Polygon, Polygon),
    }
}

// ---------------------------------------------------------------------------
// Distance helpers for margin checks.

fn dist_pp(a: &Point2, b: &Point2) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

fn dist_point_seg(p: &Point2, a: &Point2, b: &Point2) -> f64 {
    let d = b.sub(a);
    let len2 = d.dot(&d);
    if len2 == 0.0 {
        return dist_pp(p, a);
    }
    let t = (p.sub(a).dot(&d) / len2).clamp(0.0, 1.0);
    dist_pp(p, &Point2::new(a.x + t * d.x, a.y + t * d.y))
}

fn dist_seg_seg(p: &Point2, q: &Point2, a: &Point2, b: &Point2) -> f64 {
    if segments_intersect(p, q, a, b) {
        return 0.0;
    }
    dist_point_seg(p, a, b)
        .min(dist_point_seg(q, a, b))
        .min(dist_point_seg(a, p, q))
        .min(dist_point_seg(b, p, q))
}

/// Every boundary segment of a geometry (rings for polygons).
fn boundary_segments(g: &Geometry) -> Vec<(Point2, Point2)> {
    let mut out = Vec::new();
    let mut push_path = |path: &[Point2]| {
        for w in path.windows(2) {
            out.push((w[0], w[1]));
        }
    };
    match g {
        Geometry::Point(_) => {}
        Geometry::Polyline(path) => push_path(path),
        Geometry::Polygon(pg) => {
            push_path(&pg.exterior);
            for h in &pg.holes {
                push_path(h);
            }
        }
        Geometry::MultiPolygon(pgs) => {
            for pg in pgs {
                push_path(&pg.exterior);
                for h in &pg.holes {
                    push_path(h);
                }
            }
        }
    }
    out
}

/// Minimum distance between the boundaries (or points) of two geometries.
fn clearance(a: &Geometry, b: &Geometry) -> f64 {
    let sa = boundary_segments(a);
    let sb = boundary_segments(b);
    match (a, b) {
        (Geometry::Point(p), Geometry::Point(q)) => dist_pp(p, q),
        (Geometry::Point(p), _) => sb
            .iter()
            .map(|(u, v)| dist_point_seg(p, u, v))
            .fold(f64::INFINITY, f64::min),
        (_, Geometry::Point(q)) => sa
            .iter()
            .map(|(u, v)| dist_point_seg(q, u, v))
            .fold(f64::INFINITY, f64::min),
        _ => {
            let mut best = f64::INFINITY;
            for (p, q) in &sa {
                for (u, v) in &sb {
                    best = best.min(dist_seg_seg(p, q, u, v));
                }
            }
            best
        }
    }
}

// ---------------------------------------------------------------------------
// Topology constructions.

fn attempt_topo(
    pt: PairType,
    class: TopoClass,
    rng: &mut ChaCha8Rng,
) -> Option<(Geometry, Geometry)> {
    use TopoClass::*;
    match (pt, class) {
        (PairType::PointPolyline, Disjoint)
        | (PairType::PointPolygon, Disjoint)
        | (PairType::PolylinePolyline, Disjoint)
        | (PairType::PolylinePolygon, Disjoint)
        | (PairType::PolygonPolygon, Disjoint) => {
            let (ka, kb) = pair_kinds(pt);
            let a = sample_kind(ka, rng);
            let b = sample_kind(kb, rng);
            (clearance(&a, &b) >= SEPARATION).then_some((a, b))
        }
        (PairType::PointPolyline, Intersects) => {
            let path = sample_polyline(rng);
            let k = rng.gen_range(0..path.len() - 1);
            let t = rng.gen_range(0.2..0.8);
            let (u, v) = (path[k], path[k + 1]);
            let p = Point2::new(u.x + t * (v.x - u.x), u.y + t * (v.y - u.y));
            Some((Geometry::Point(p), Geometry::Polyline(path)))
        }
        (PairType::PointPolygon, Contains) => {
            let ps = sample_polygon(rng);
            let g = ps.geom();
            // Depth capped below the guaranteed kernel-disc radius so small
            // polygons still admit qualifying points.
            let depth = SEPARATION.min(0.35 * ps.r_lo);
            let (x0, y0, x1, y1) = coord_bounds(&g);
            for _ in 0..32 {
                let p = Point2::new(rng.gen_range(x0..x1), rng.gen_range(y0..y1));
                if point_in_polygon(&p, &ps.pg) == Region::Interior {
                    let gp = Geometry::Point(p);
                    if clearance(&gp, &g) >= depth {
                        return Some((gp, g));
                    }
                }
            }
            None
        }
        (PairType::PolylinePolyline, Intersects) => {
            let a = sample_polyline(rng);
            let b = sample_polyline(rng);
            // Slide b so interior points of two segments coincide; the
            // crossing survives rounding unless the segments are parallel,
            // which the predicate gate rejects.
            let (i, j) = (rng.gen_range(0..a.len() - 1), rng.gen_range(0..b.len() - 1));
            let ta = rng.gen_range(0.3..0.7);
            let tb = rng.gen_range(0.3..0.7);
            let pa = lerp(&a[i], &a[i + 1], ta);
            let pb = lerp(&b[j], &b[j + 1], tb);
            let moved = translate(&Geometry::Polyline(b), pa.x - pb.x, pa.y - pb.y);
            Some((Geometry::Polyline(a), moved))
        }
        (PairType::PolylinePolygon, Touches) => {
            let ps = sample_polygon(rng);
            let k = rng.gen_range(0..ps.pg.exterior.len() - 1);
            let v = ps.pg.exterior[k];
            let out = normalize_dir(v.sub(&ps.center))?;
            let perp = Point2::new(-out.y, out.x);
            let mut path = vec![v];
            let mut d = 0.0;
            for _ in 0..rng.gen_range(1..=2usize) {
                d += rng.gen_range(0.1..0.25);
                let jitter = rng.gen_range(-0.05..0.05);
                path.push(Point2::new(
                    v.x + d * out.x + jitter * perp.x,
                    v.y + d * out.y + jitter * perp.y,
                ));
            }
            Some((Geometry::Polyline(path), ps.geom()))
        }
        (PairType::PolylinePolygon, Intersects) => {
            let ps = sample_polygon(rng);
            let ang = rng.gen_range(0.0..std::f64::consts::TAU);
            let reach = ps.r_hi + rng.gen_range(0.15..0.4);
            let path = vec![
                ps.center,
                Point2::new(ps.center.x + reach * ang.cos(), ps.center.y + reach * ang.sin()),
            ];
            Some((Geometry::Polyline(path), ps.geom()))
        }
        (PairType::PolylinePolygon, Within) => {
            let ps = sample_polygon(rng);
            // A walk confined to 0.3x the inner radius stays inside the
            // kernel disc (radius >= 0.36 r_lo) with clearance.
            let rad = 0.3 * ps.r_lo;
            let nv = rng.gen_range(2..=4usize);
            let mut path = vec![ps.center];
            while path.len() < nv {
                let last = *path.last().unwrap();
                let mut placed = false;
                for _ in 0..32 {
                    let ang = rng.gen_range(0.0..std::f64::consts::TAU);
                    let len = rng.gen_range(0.2 * rad..0.8 * rad);
                    let cand = Point2::new(last.x + len * ang.cos(), last.y + len * ang.sin());
                    if dist_pp(&cand, &ps.center) <= rad {
                        path.push(cand);
                        placed = true;
                        break;
                    }
                }
                if !placed {
                    return None;
                }
            }
            Some((Geometry::Polyline(path), ps.geom()))
        }
        (PairType::PolygonPolygon, Touches) => {
            if rng.gen_bool(0.5) {
                touch_shared_vertex(rng)
            } else {
                touch_shared_edge(rng)
            }
        }
        (PairType::PolygonPolygon, Intersects) => {
            let a = sample_polygon(rng);
            let b = sample_polygon(rng);
            // Recenter b between "deep overlap" and "barely overlapping".
            let gap = rng.gen_range(0.2..0.9) * (a.r_hi + b.r_hi);
            let ang = rng.gen_range(0.0..std::f64::consts::TAU);
            let target = Point2::new(a.center.x + gap * ang.cos(), a.center.y + gap * ang.sin());
            let moved = translate(&b.geom(), target.x - b.center.x, target.y - b.center.y);
            Some((a.geom(), moved))
        }
        (PairType::PolygonPolygon, Contains) => contains_pair(rng),
        (PairType::PolygonPolygon, Within) => {
            let (a, b) = contains_pair(rng)?;
            Some((b, a))
        }
        (PairType::PolygonPolygon, Equals) => {
            let ps = sample_polygon(rng);
            let open = &ps.pg.exterior[..ps.pg.exterior.len() - 1];
            let k = rng.gen_range(1..open.len());
            let mut ring: Vec<Point2> = open[k..].to_vec();
            ring.extend_from_slice(&open[..k]);
            ring.push(ring[0]);
            let b = Geometry::Polygon(Polygon {
                exterior: ring,
                holes: vec![],
            });
            Some((ps.geom(), b))
        }
        _ => None,
    }
}

fn lerp(a: &Point2, b: &Point2, t: f64) -> Point2 {
    Point2::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
}

fn normalize_dir(d: Point2) -> Option<Point2> {
    let n = d.x.hypot(d.y);
    (n > 1e-12).then(|| Point2::new(d.x / n, d.y / n))
}

/// Two stars sharing exactly one vertex, interiors on opposite sides.
fn touch_shared_vertex(rng: &mut ChaCha8Rng) -> Option<(Geometry, Geometry)> {
    let a = sample_polygon(rng);
    let k = rng.gen_range(0..a.pg.exterior.len() - 1);
    let v = a.pg.exterior[k];
    let out = normalize_dir(v.sub(&a.center))?;
    let nv = rng.gen_range(4..=12usize);
    let r_hi = rng.gen_range(0.12..0.3);
    let r_lo = r_hi * rng.gen_range(0.55..0.9);
    let d = rng.gen_range(r_lo..=r_hi);
    let center_b = Point2::new(v.x + d * out.x, v.y + d * out.y);
    // The shared vertex sits at this exact angle from b's center.
    let ang_v = (v.y - center_b.y).atan2(v.x - center_b.x);
    let ring = star_ring(rng, center_b, r_lo, r_hi, nv, Some((ang_v, v)));
    let b = Geometry::Polygon(Polygon {
        exterior: ring,
        holes: vec![],
    });
    Some((a.geom(), b))
}

/// Two axis-aligned rectangles sharing a vertical edge segment.
fn touch_shared_edge(rng: &mut ChaCha8Rng) -> Option<(Geometry, Geometry)> {
    let x0 = rng.gen_range(-0.9..0.1);
    let x1 = x0 + rng.gen_range(0.2..0.5);
    let x2 = x1 + rng.gen_range(0.2..0.5);
    let y0 = rng.gen_range(-0.9..0.3);
    let y1 = y0 + rng.gen_range(0.3..0.6);
    let y2 = rng.gen_range(y0 - 0.2..y1 - 0.15);
    let y3 = y2 + rng.gen_range(0.3..0.6);
    let rect = |xa: f64, xb: f64, ya: f64, yb: f64| {
        Geometry::Polygon(Polygon {
            exterior: vec![
                Point2::new(xa, ya),
                Point2::new(xb, ya),
                Point2::new(xb, yb),
                Point2::new(xa, yb),
                Point2::new(xa, ya),
            ],
            holes: vec![],
        })
    };
    Some((rect(x0, x1, y0, y1), rect(x1, x2, y2, y3)))
}

/// A star strictly inside another, with clearance between the boundaries.
fn contains_pair(rng: &mut ChaCha8Rng) -> Option<(Geometry, Geometry)> {
    let nv = rng.gen_range(4..=12usize);
    let r_hi = rng.gen_range(0.25..0.35);
    let r_lo = r_hi * rng.gen_range(0.6..0.9);
    let lim = 0.98 - r_hi;
    let center = Point2::new(rng.gen_range(-lim..lim), rng.gen_range(-lim..lim));
    let outer = Polygon {
        exterior: star_ring(rng, center, r_lo, r_hi, nv, None),
        holes: vec![],
    };
    // Inner star confined to a disc inside the outer's kernel disc
    // (radius >= 0.36 r_lo): offset + inner reach stays below 0.34 r_lo.
    let off = rng.gen_range(0.0..0.05 * r_lo);
    let ang = rng.gen_range(0.0..std::f64::consts::TAU);
    let inner_center = Point2::new(center.x + off * ang.cos(), center.y + off * ang.sin());
    let ri_hi = r_lo * rng.gen_range(0.15..0.28);
    let ri_lo = ri_hi * rng.gen_range(0.55..0.9);
    let nv_inner = rng.gen_range(4..=12usize);
    let inner = Polygon {
        exterior: star_ring(rng, inner_center, ri_lo, ri_hi, nv_inner, None),
        holes: vec![],
    };
    let (a, b) = (Geometry::Polygon(outer), Geometry::Polygon(inner));
    (clearance(&a, &b) >= MARGIN).then_some((a, b))
}

// ---------------------------------------------------------------------------
// Direction and distance constructions.

fn attempt_direction(
    pt: PairType,
    class: usize,
    rng: &mut ChaCha8Rng,
) -> Option<(Geometry, Geometry)> {
    let (ka, kb) = pair_kinds(pt);
    let a = sample_kind(ka, rng);
    let ca = centroid(&a);
    // Bearing inside the class bin, kept a guard band away from its edges:
    // rounding in the centroid cannot flip the label, and the classes stay
    // separated rather than straddling the bin boundaries.
    let bearing = 22.5 * class as f64 + rng.gen_range(-9.0..9.0);
    let theta = (90.0 - bearing).to_radians();
    let r = rng.gen_range(0.15..0.9);
    let target = Point2::new(ca.x + r * theta.cos(), ca.y + r * theta.sin());
    let b0 = sample_kind(kb, rng);
    let cb = centroid(&b0);
    let b = translate(&b0, target.x - cb.x, target.y - cb.y);
    Some((a, b))
}

fn attempt_distance(pt: PairType, rng: &mut ChaCha8Rng) -> Option<(Geometry, Geometry)> {
    let (ka, kb) = pair_kinds(pt);
    let a = sample_kind(ka, rng);
    let ca = centroid(&a);
    let d = rng.gen_range(0.05..1.2);
    let ang = rng.gen_range(0.0..std::f64::consts::TAU);
    let target = Point2::new(ca.x + d * ang.cos(), ca.y + d * ang.sin());
    let b0 = sample_kind(kb, rng);
    let cb = centroid(&b0);
    let b = translate(&b0, target.x - cb.x, target.y - cb.y);
    Some((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(task: Task, pt: PairType, per_class: usize, seed: u64) -> GenSpec {
        GenSpec {
            task,
            pair_type: pt,
            per_class,
            seed,
            config_hash: "test".into(),
        }
    }

    fn relabel(task: Task, pt: PairType, s: &PairSample) -> bool {
        match task {
            Task::Topology => {
                let classes = topo_classes(pt).unwrap();
                topo_label(&s.a, &s.b).map_or(false, |l| {
                    classes
                        .iter()
                        .position(|&c| c == l)
                        .map_or(false, |i| i as u8 == s.topo.unwrap())
                })
            }
            Task::Direction => {
                dir_label(&s.a, &s.b).map_or(false, |l| l == s.dir.unwrap())
            }
            Task::Distance => {
                (dist_label(&s.a, &s.b) - s.dist.unwrap()).abs() == 0.0
            }
        }
    }

    fn check_dataset(ds: &Dataset, n_classes: usize, per_class: usize) {
        assert_eq!(ds.pairs.len(), n_classes * per_class);
        for s in &ds.pairs {
            assert!(validate(&s.a).is_ok() && validate(&s.b).is_ok());
            assert!(in_bounds(&s.a) && in_bounds(&s.b));
            assert!(relabel(ds.task, ds.pair_type, s), "label mismatch");
        }
        // Exact class balance and per-class stratified splits.
        for c in 0..n_classes {
            let of_class: Vec<_> = ds
                .pairs
                .iter()
                .filter(|s| s.class().map_or(true, |l| l as usize == c))
                .collect();
            if ds.task == Task::Distance {
                continue;
            }
            assert_eq!(of_class.len(), per_class);
            let count = |sp: Split| of_class.iter().filter(|s| s.split == sp).count();
            assert_eq!(count(Split::Train), per_class * 6 / 10);
            assert_eq!(count(Split::Val), per_class * 2 / 10);
        }
    }

    #[test]
    fn point_polygon_topology_contract() {
        let ds = gen_pairs(&spec(Task::Topology, PairType::PointPolygon, 100, 7)).unwrap();
        check_dataset(&ds, 2, 100);
        assert_eq!(ds.pairs.len(), 200);
        let n_train = ds.pairs.iter().filter(|s| s.split == Split::Train).count();
        let n_val = ds.pairs.iter().filter(|s| s.split == Split::Val).count();
        let n_test = ds.pairs.iter().filter(|s| s.split == Split::Test).count();
        assert_eq!((n_train, n_val, n_test), (120, 40, 40));
    }

    #[test]
    fn polygon_polygon_topology_all_classes() {
        let ds = gen_pairs(&spec(Task::Topology, PairType::PolygonPolygon, 10, 3)).unwrap();
        check_dataset(&ds, 6, 10);
    }

    #[test]
    fn polyline_pair_types() {
        let ds = gen_pairs(&spec(Task::Topology, PairType::PolylinePolygon, 10, 5)).unwrap();
        check_dataset(&ds, 4, 10);
        let ds = gen_pairs(&spec(Task::Topology, PairType::PolylinePolyline, 10, 5)).unwrap();
        check_dataset(&ds, 2, 10);
        let ds = gen_pairs(&spec(Task::Topology, PairType::PointPolyline, 10, 5)).unwrap();
        check_dataset(&ds, 2, 10);
    }

    #[test]
    fn direction_all_winds() {
        let ds = gen_pairs(&spec(Task::Direction, PairType::PointPoint, 5, 11)).unwrap();
        check_dataset(&ds, 16, 5);
        // Mixed kinds work too.
        let ds = gen_pairs(&spec(Task::Direction, PairType::PointPolygon, 3, 11)).unwrap();
        check_dataset(&ds, 16, 3);
    }

    #[test]
    fn distance_stratum() {
        let ds = gen_pairs(&spec(Task::Distance, PairType::PointPoint, 25, 13)).unwrap();
        assert_eq!(ds.pairs.len(), 50);
        for s in &ds.pairs {
            let d = s.dist.unwrap();
            assert!(d > 0.0 && d < 2.0 * std::f64::consts::SQRT_2);
            assert_eq!(d, dist_label(&s.a, &s.b));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let s = spec(Task::Topology, PairType::PolygonPolygon, 6, 42);
        let d1 = gen_pairs(&s).unwrap();
        let d2 = gen_pairs(&s).unwrap();
        let mut b1 = Vec::new();
        let mut b2 = Vec::new();
        d1.write_jsonl(&mut b1).unwrap();
        d2.write_jsonl(&mut b2).unwrap();
        assert_eq!(b1, b2);
        let d3 = gen_pairs(&spec(Task::Topology, PairType::PolygonPolygon, 6, 43)).unwrap();
        let mut b3 = Vec::new();
        d3.write_jsonl(&mut b3).unwrap();
        assert_ne!(b1, b3);
    }

    #[test]
    fn jsonl_round_trip() {
        let ds = gen_pairs(&spec(Task::Topology, PairType::PolylinePolygon, 5, 9)).unwrap();
        let mut buf = Vec::new();
        ds.write_jsonl(&mut buf).unwrap();
        let back = Dataset::read_jsonl(std::io::BufReader::new(&buf[..])).unwrap();
        assert_eq!(back.task, ds.task);
        assert_eq!(back.pair_type, ds.pair_type);
        assert_eq!(back.pairs.len(), ds.pairs.len());
        for (x, y) in ds.pairs.iter().zip(&back.pairs) {
            assert_eq!(x.topo, y.topo);
            assert_eq!(x.split, y.split);
            // GeoJSON serialization round-trips coordinates exactly.
            assert_eq!(centroid(&x.a).x, centroid(&y.a).x);
            assert_eq!(centroid(&x.b).y, centroid(&y.b).y);
        }
        // Labels still verify after the round trip.
        for s in &back.pairs {
            assert!(relabel(back.task, back.pair_type, s));
        }
    }

    #[test]
    fn unsupported_topology_pair_type() {
        let err = gen_pairs(&spec(Task::Topology, PairType::PointPoint, 5, 1)).unwrap_err();
        assert!(matches!(err, TaskError::UnsupportedPair(_)));
        assert!(matches!(
            gen_pairs(&spec(Task::Distance, PairType::PointPoint, 0, 1)).unwrap_err(),
            TaskError::EmptyInput
        ));
    }
}
