//! Exact topological labeling of geometry pairs.
//!
//! Labels follow point-set semantics: a path is split at every contact with
//! a polygon's boundary and each open piece is classified as interior,
//! boundary, or exterior; the resulting region profile decides the relation.

use super::{TaskError, TopoClass};
use crate::geometry::{
    orient, point_in_polygon, point_on_segment, Geometry, Point2, Polygon, Region, EPS_ORIENT,
};

/// Topological relation of the pair `(a, b)`.
///
/// Mixed-kind pairs use the canonical representative from the pair type's
/// class set in either argument order: a point interior to a polygon is
/// `Contains` (the polygon contains the point), a polyline inside a polygon
/// is `Within`. Only polygon-polygon distinguishes the two directions, read
/// left to right: `Contains` means `a` contains `b`.
pub fn topo_label(a: &Geometry, b: &Geometry) -> Result<TopoClass, TaskError> {
    use Geometry::*;
    match (a, b) {
        (Point(p), Polyline(path)) | (Polyline(path), Point(p)) => {
            Ok(point_vs_polyline(p, path))
        }
        (Point(p), Polygon(pg)) | (Polygon(pg), Point(p)) => Ok(point_vs_polygon(p, pg)),
        (Polyline(x), Polyline(y)) => Ok(polyline_vs_polyline(x, y)),
        (Polyline(path), Polygon(pg)) | (Polygon(pg), Polyline(path)) => {
            Ok(polyline_vs_polygon(path, pg))
        }
        (Polygon(x), Polygon(y)) => Ok(polygon_vs_polygon(x, y)),
        (a, b) => Err(TaskError::UnsupportedPair(format!(
            "{} vs {}",
            kind_name(a),
            kind_name(b)
        ))),
    }
}

fn kind_name(g: &Geometry) -> &'static str {
    match g {
        Geometry::Point(_) => "point",
        Geometry::Polyline(_) => "polyline",
        Geometry::Polygon(_) => "polygon",
        Geometry::MultiPolygon(_) => "multipolygon",
    }
}

/// The class `topo_label(b, a)` must report given `topo_label(a, b)` for a
/// polygon-polygon pair; every other supported pair type is symmetric.
pub fn swapped_class(c: TopoClass) -> TopoClass {
    match c {
        TopoClass::Contains => TopoClass::Within,
        TopoClass::Within => TopoClass::Contains,
        other => other,
    }
}

fn point_vs_polyline(p: &Point2, path: &[Point2]) -> TopoClass {
    for w in path.windows(2) {
        if point_on_segment(p, &w[0], &w[1]) {
            return TopoClass::Intersects;
        }
    }
    TopoClass::Disjoint
}

fn point_vs_polygon(p: &Point2, pg: &Polygon) -> TopoClass {
    match point_in_polygon(p, pg) {
        Region::Interior => TopoClass::Contains,
        Region::Boundary => TopoClass::Touches,
        Region::Exterior => TopoClass::Disjoint,
    }
}

fn polyline_vs_polyline(a: &[Point2], b: &[Point2]) -> TopoClass {
    let mut scratch = Vec::new();
    for wa in a.windows(2) {
        for wb in b.windows(2) {
            scratch.clear();
            if seg_hit_params(&wa[0], &wa[1], &wb[0], &wb[1], &mut scratch) {
                return TopoClass::Intersects;
            }
        }
    }
    TopoClass::Disjoint
}

fn polyline_vs_polygon(path: &[Point2], pg: &Polygon) -> TopoClass {
    let prof = path_profile(path, pg);
    match (prof.interior, prof.boundary, prof.exterior) {
        (false, false, _) => TopoClass::Disjoint,
        (false, true, _) => TopoClass::Touches,
        (true, _, true) => TopoClass::Intersects,
        (true, _, false) => TopoClass::Within,
    }
}

fn polygon_vs_polygon(a: &Polygon, b: &Polygon) -> TopoClass {
    if canonical_edges(a) == canonical_edges(b) {
        return TopoClass::Equals;
    }
    let pa = polygon_boundary_profile(a, b);
    let pb = polygon_boundary_profile(b, a);
    // Same region under representations the edge canonicalization does not
    // reconcile: both boundaries lie entirely on each other.
    if pa.boundary_only() && pb.boundary_only() {
        return TopoClass::Equals;
    }
    let contact = pa.boundary || pb.boundary;
    let interiors_overlap = pa.interior || pb.interior;
    if !interiors_overlap {
        return if contact {
            TopoClass::Touches
        } else {
            TopoClass::Disjoint
        };
    }
    // Containment requires the inner boundary to never leave the outer
    // region and the outer boundary to never dip inside the inner one
    // (which would mean part of the inner region pokes out).
    if !pb.exterior && !pa.interior {
        TopoClass::Contains
    } else if !pa.exterior && !pb.interior {
        TopoClass::Within
    } else {
        TopoClass::Intersects
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct Profile {
    interior: bool,
    boundary: bool,
    exterior: bool,
}

impl Profile {
    fn boundary_only(self) -> bool {
        self.boundary && !self.interior && !self.exterior
    }

    fn absorb(&mut self, other: Profile) {
        self.interior |= other.interior;
        self.boundary |= other.boundary;
        self.exterior |= other.exterior;
    }
}

/// Profile of every ring of `a` (as closed paths) against polygon `b`.
fn polygon_boundary_profile(a: &Polygon, b: &Polygon) -> Profile {
    let mut prof = path_profile(&a.exterior, b);
    for hole in &a.holes {
        prof.absorb(path_profile(hole, b));
    }
    prof
}

/// Split `path` at every contact with the boundary of `pg` and record which
/// regions of `pg` the pieces visit. A connected path cannot change region
/// without touching the boundary, so classifying one midpoint per piece is
/// exact (up to the generation margins that keep pieces away from
/// degenerate slivers).
fn path_profile(path: &[Point2], pg: &Polygon) -> Profile {
    let mut edges: Vec<(Point2, Point2)> = Vec::new();
    for ring in std::iter::once(&pg.exterior).chain(pg.holes.iter()) {
        for w in ring.windows(2) {
            edges.push((w[0], w[1]));
        }
    }
    let mut prof = Profile::default();
    let mut ts: Vec<f64> = Vec::new();
    for w in path.windows(2) {
        let (p, q) = (&w[0], &w[1]);
        ts.clear();
        ts.push(0.0);
        ts.push(1.0);
        let mut contact = false;
        for (ea, eb) in &edges {
            contact |= seg_hit_params(p, q, ea, eb, &mut ts);
        }
        if contact {
            prof.boundary = true;
        }
        ts.sort_by(f64::total_cmp);
        for pair in ts.windows(2) {
            let (t0, t1) = (pair[0], pair[1]);
            if t1 - t0 < 1e-9 {
                continue;
            }
            let t = 0.5 * (t0 + t1);
            let m = Point2::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y));
            match point_in_polygon(&m, pg) {
                Region::Interior => prof.interior = true,
                Region::Boundary => prof.boundary = true,
                Region::Exterior => prof.exterior = true,
            }
        }
    }
    prof
}

/// Parameter of `p`'s projection onto the segment `a..b`.
fn proj_t(p: &Point2, a: &Point2, b: &Point2) -> f64 {
    let d = b.sub(a);
    p.sub(a).dot(&d) / d.dot(&d)
}

/// Collect the parameters along `p..q` where it meets the segment `a..b`
/// (endpoints of an overlap run for collinear segments). Returns whether
/// the segments touch at all.
fn seg_hit_params(p: &Point2, q: &Point2, a: &Point2, b: &Point2, ts: &mut Vec<f64>) -> bool {
    let snap = |x: f64| if x.abs() <= EPS_ORIENT { 0.0 } else { x };
    let o1 = snap(orient(a, b, p));
    let o2 = snap(orient(a, b, q));
    let o3 = snap(orient(p, q, a));
    let o4 = snap(orient(p, q, b));
    if o1 == 0.0 && o2 == 0.0 {
        let (ta, tb) = (proj_t(a, p, q), proj_t(b, p, q));
        let lo = ta.min(tb).max(0.0);
        let hi = ta.max(tb).min(1.0);
        if lo <= hi {
            ts.push(lo);
            ts.push(hi);
            return true;
        }
        return false;
    }
    let mut hit = false;
    if o1 == 0.0 && point_on_segment(p, a, b) {
        ts.push(0.0);
        hit = true;
    }
    if o2 == 0.0 && point_on_segment(q, a, b) {
        ts.push(1.0);
        hit = true;
    }
    if o3 == 0.0 && point_on_segment(a, p, q) {
        ts.push(proj_t(a, p, q).clamp(0.0, 1.0));
        hit = true;
    }
    if o4 == 0.0 && point_on_segment(b, p, q) {
        ts.push(proj_t(b, p, q).clamp(0.0, 1.0));
        hit = true;
    }
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        ts.push((o1 / (o1 - o2)).clamp(0.0, 1.0));
        hit = true;
    }
    hit
}

/// Representation-independent edge set of a polygon: collinear vertices are
/// dropped, each edge is ordered lexicographically, and the whole set is
/// sorted. Two polygons bound the same region with the same holes iff their
/// canonical edge sets are equal (holes included).
fn canonical_edges(pg: &Polygon) -> Vec<[f64; 4]> {
    let mut edges = Vec::new();
    for ring in std::iter::once(&pg.exterior).chain(pg.holes.iter()) {
        let open = &ring[..ring.len() - 1];
        let n = open.len();
        let mut kept: Vec<Point2> = Vec::with_capacity(n);
        for i in 0..n {
            let prev = &open[(i + n - 1) % n];
            let next = &open[(i + 1) % n];
            if orient(prev, &open[i], next).abs() > EPS_ORIENT {
                kept.push(open[i]);
            }
        }
        let k = kept.len();
        for i in 0..k {
            let (mut p, mut q) = (kept[i], kept[(i + 1) % k]);
            if (p.x, p.y) > (q.x, q.y) {
                std::mem::swap(&mut p, &mut q);
            }
            edges.push([p.x, p.y, q.x, q.y]);
        }
    }
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges
}
