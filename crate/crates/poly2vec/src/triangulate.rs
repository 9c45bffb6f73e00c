//! Polygon triangulation and polyline segmentation.
//!
//! The spectral assembly only needs *some* partition of each polygon into
//! non-overlapping triangles — the summed transform is identical for every
//! valid partition — so this module uses ear clipping, with holes spliced
//! into the exterior ring through bridge edges (each bridge reuses existing
//! vertices twice; no new vertices are ever invented). Partition quality is
//! irrelevant; correctness is enforced by area-conservation and containment
//! tests instead.

use crate::geometry::{orient, point_in_polygon, Point2, Polygon, Region, EPS_ORIENT};
use thiserror::Error;

/// Triangles below this absolute area are degenerate.
pub const EPS_TRIANGLE_AREA: f64 = 1e-14;
/// Segments at or below this length are degenerate and get dropped.
pub const EPS_SEGMENT_LEN: f64 = 1e-12;

/// A non-degenerate triangle, stored counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub q: Point2,
    pub r: Point2,
    pub s: Point2,
}

impl Triangle {
    /// Build a triangle, reordering to CCW; degenerate input is an error.
    pub fn new(q: Point2, r: Point2, s: Point2) -> Result<Self, TriangulateError> {
        let two_a = orient(&q, &r, &s);
        if two_a.abs() <= 2.0 * EPS_TRIANGLE_AREA {
            return Err(TriangulateError::DegenerateTriangle);
        }
        if two_a > 0.0 {
            Ok(Triangle { q, r, s })
        } else {
            Ok(Triangle { q, r: s, s: r })
        }
    }

    /// Area (positive; vertices are CCW).
    pub fn area(&self) -> f64 {
        0.5 * orient(&self.q, &self.r, &self.s)
    }
}

/// A non-degenerate line segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub q: Point2,
    pub r: Point2,
}

impl Segment {
    pub fn new(q: Point2, r: Point2) -> Result<Self, TriangulateError> {
        if r.sub(&q).norm() <= EPS_SEGMENT_LEN {
            return Err(TriangulateError::DegenerateSegment);
        }
        Ok(Segment { q, r })
    }

    pub fn length(&self) -> f64 {
        self.r.sub(&self.q).norm()
    }
}

#[derive(Debug, Error)]
pub enum TriangulateError {
    #[error("degenerate triangle (area below {EPS_TRIANGLE_AREA})")]
    DegenerateTriangle,
    #[error("degenerate segment (length below {EPS_SEGMENT_LEN})")]
    DegenerateSegment,
    #[error("all segments of the polyline are degenerate")]
    EmptyResult,
    #[error("triangulation failed: {0}")]
    TriangulationError(String),
}

/// Result of [`split_polyline`]: the usable segments plus how many
/// consecutive-duplicate (or sub-epsilon) segments were silently dropped.
#[derive(Debug, Clone)]
pub struct SplitPolyline {
    pub segments: Vec<Segment>,
    pub dropped: usize,
}

/// Split a polyline into consecutive-vertex segments, dropping degenerate
/// ones. Erroring out would reject real-world data with duplicate vertices,
/// so the drop count is reported for the caller to warn about.
pub fn split_polyline(pts: &[Point2]) -> Result<SplitPolyline, TriangulateError> {
    let mut segments = Vec::with_capacity(pts.len().saturating_sub(1));
    let mut dropped = 0;
    for w in pts.windows(2) {
        match Segment::new(w[0], w[1]) {
            Ok(s) => segments.push(s),
            Err(_) => dropped += 1,
        }
    }
    if segments.is_empty() {
        return Err(TriangulateError::EmptyResult);
    }
    Ok(SplitPolyline { segments, dropped })
}

/// Triangulate a polygon (holes allowed) into non-overlapping triangles
/// covering exactly the polygon region. All triangle vertices are polygon
/// vertices.
pub fn triangulate(pg: &Polygon) -> Result<Vec<Triangle>, TriangulateError> {
    // Work with open rings (closing repeat dropped).
    let exterior: Vec<Point2> = pg.exterior[..pg.exterior.len() - 1].to_vec();
    let holes: Vec<Vec<Point2>> =
        pg.holes.iter().map(|h| h[..h.len() - 1].to_vec()).collect();
    let merged = if holes.is_empty() { exterior } else { merge_holes(exterior, holes)? };
    let tris = ear_clip(&merged)?;

    // Partition sanity: triangle areas must add up to the polygon area.
    let want = crate::geometry::polygon_area(pg);
    let got: f64 = tris.iter().map(Triangle::area).sum();
    if (got - want).abs() > 1e-9 * want.max(1e-12) {
        return Err(TriangulateError::TriangulationError(format!(
            "triangle areas sum to {got}, polygon area is {want}"
        )));
    }
    Ok(tris)
}

/// Splice every hole into the exterior ring via a two-way bridge to a
/// visible vertex, producing one (degenerate) simple polygon boundary.
/// Exterior arrives CCW, holes CW, both as open rings.
fn merge_holes(
    exterior: Vec<Point2>,
    mut holes: Vec<Vec<Point2>>,
) -> Result<Vec<Point2>, TriangulateError> {
    let max_x_of = |h: &[Point2]| h.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    // Bridge right-most holes first so later bridges cannot cross earlier ones.
    holes.sort_by(|a, b| max_x_of(b).partial_cmp(&max_x_of(a)).unwrap());

    let mut outer = exterior;
    for hole in holes {
        // M: hole vertex with maximum x (the hole's right extreme).
        let m_idx = hole
            .iter()
            .enumerate()
            .max_by(|a, b| (a.1.x, a.1.y).partial_cmp(&(b.1.x, b.1.y)).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let m = hole[m_idx];

        let p_idx = find_bridge_target(&outer, &m)?;

        // outer[..=p] ++ [M, hole walked once around, M] ++ [P] ++ outer[p+1..]
        let mut merged = Vec::with_capacity(outer.len() + hole.len() + 2);
        merged.extend_from_slice(&outer[..=p_idx]);
        for k in 0..hole.len() {
            merged.push(hole[(m_idx + k) % hole.len()]);
        }
        merged.push(m);
        merged.push(outer[p_idx]);
        merged.extend_from_slice(&outer[p_idx + 1..]);
        outer = merged;
    }
    Ok(outer)
}

/// Find the index of an outer vertex visible from `m` by casting a ray in
/// +x and, if the nearest hit is mid-edge, resolving toward a vertex.
fn find_bridge_target(outer: &[Point2], m: &Point2) -> Result<usize, TriangulateError> {
    let n = outer.len();
    let mut best_x = f64::INFINITY;
    let mut best: Option<(usize, usize)> = None; // edge (i, i+1)
    // Direct vertex hits on the ray take priority at equal distance.
    let mut vert_hit: Option<usize> = None;
    let mut vert_x = f64::INFINITY;
    for i in 0..n {
        let p = &outer[i];
        if p.y == m.y && p.x >= m.x && p.x < vert_x {
            vert_x = p.x;
            vert_hit = Some(i);
        }
        let a = &outer[i];
        let b = &outer[(i + 1) % n];
        if (a.y > m.y) == (b.y > m.y) {
            continue; // edge does not straddle the ray (horizontals skipped)
        }
        let t = (m.y - a.y) / (b.y - a.y);
        let x = a.x + t * (b.x - a.x);
        if x >= m.x - EPS_ORIENT && x < best_x {
            best_x = x;
            best = Some((i, (i + 1) % n));
        }
    }
    if let Some(vi) = vert_hit {
        if vert_x <= best_x {
            return Ok(vi);
        }
    }
    let Some((ia, ib)) = best else {
        return Err(TriangulateError::TriangulationError(
            "hole bridge ray found no exterior edge".into(),
        ));
    };

    let hit = Point2::new(best_x, m.y);
    // Candidate endpoint: prefer the one to the right of the hit.
    let cand = if outer[ia].x > outer[ib].x { ia } else { ib };
    // If a reflex vertex sits inside triangle (m, hit, candidate) the direct
    // bridge could cross the boundary; bridge to the reflex vertex closest in
    // angle to the ray instead.
    let mut target = cand;
    let mut best_key = f64::INFINITY;
    for j in 0..n {
        if j == ia || j == ib {
            continue;
        }
        let prev = &outer[(j + n - 1) % n];
        let next = &outer[(j + 1) % n];
        let reflex = orient(prev, &outer[j], next) < 0.0;
        if !reflex {
            continue;
        }
        if in_triangle_closed(&outer[j], m, &hit, &outer[cand]) {
            let dx = outer[j].x - m.x;
            let dy = (outer[j].y - m.y).abs();
            // tan of angle to the ray; ties broken by distance via dx
            let key = if dx > 0.0 { dy / dx } else { f64::INFINITY };
            if key < best_key {
                best_key = key;
                target = j;
            }
        }
    }
    Ok(target)
}

/// Closed point-in-triangle test tolerant of either orientation.
fn in_triangle_closed(p: &Point2, a: &Point2, b: &Point2, c: &Point2) -> bool {
    let flip = if orient(a, b, c) < 0.0 { -1.0 } else { 1.0 };
    orient(a, b, p) * flip >= -EPS_ORIENT
        && orient(b, c, p) * flip >= -EPS_ORIENT
        && orient(c, a, p) * flip >= -EPS_ORIENT
}

/// Ear-clip a CCW (possibly degenerate, bridge-containing) simple polygon.
fn ear_clip(poly: &[Point2]) -> Result<Vec<Triangle>, TriangulateError> {
    let n = poly.len();
    if n < 3 {
        return Err(TriangulateError::TriangulationError("fewer than 3 vertices".into()));
    }
    let mut list = VertexList {
        next: (0..n).map(|i| (i + 1) % n).collect(),
        prev: (0..n).map(|i| (i + n - 1) % n).collect(),
        alive: vec![true; n],
        remaining: n,
    };
    let mut tris = Vec::with_capacity(n - 2);

    let mut cur = 0usize;
    let mut misses = 0usize;
    while list.remaining > 3 {
        let a = list.prev[cur];
        let c = list.next[cur];
        if is_ear(poly, &list.next, cur, a, c) {
            if let Ok(t) = Triangle::new(poly[a], poly[cur], poly[c]) {
                tris.push(t);
            }
            list.unlink(cur);
            cur = c;
            misses = 0;
        } else {
            cur = c;
            misses += 1;
            if misses > list.remaining {
                // No ear in a full pass: strip degenerate corridor vertices
                // (bridge duplicates, spikes, straight-throughs) and retry.
                let removed = cleanup_pass(poly, &mut list);
                if list.remaining < 3 {
                    return Ok(tris);
                }
                if removed == 0 {
                    return Err(TriangulateError::TriangulationError(
                        "no ear found (non-simple input?)".into(),
                    ));
                }
                cur = (0..n).find(|&i| list.alive[i]).unwrap();
                misses = 0;
            }
        }
    }
    // Last triangle.
    let a = cur;
    let b = list.next[a];
    let c = list.next[b];
    if let Ok(t) = Triangle::new(poly[a], poly[b], poly[c]) {
        tris.push(t);
    }
    Ok(tris)
}

/// Doubly linked vertex cycle over a fixed vertex buffer.
struct VertexList {
    next: Vec<usize>,
    prev: Vec<usize>,
    alive: Vec<bool>,
    remaining: usize,
}

impl VertexList {
    fn unlink(&mut self, i: usize) {
        self.next[self.prev[i]] = self.next[i];
        self.prev[self.next[i]] = self.prev[i];
        self.alive[i] = false;
        self.remaining -= 1;
    }
}

fn is_ear(poly: &[Point2], next: &[usize], b: usize, a: usize, c: usize) -> bool {
    let (pa, pb, pc) = (&poly[a], &poly[b], &poly[c]);
    if orient(pa, pb, pc) <= EPS_ORIENT {
        return false; // reflex or collinear corner
    }
    // No other remaining vertex may lie inside the candidate ear (or on its
    // boundary, unless it coincides with a corner — bridge duplicates do).
    let mut j = next[c];
    while j != a {
        let pj = &poly[j];
        if pj != pa && pj != pb && pj != pc && in_triangle_closed(pj, pa, pb, pc) {
            return false;
        }
        j = next[j];
    }
    true
}

/// Remove geometric no-op vertices: zero-length edges, spikes whose two
/// neighbors coincide, and straight-through collinear vertices. Returns how
/// many vertices were removed.
fn cleanup_pass(poly: &[Point2], list: &mut VertexList) -> usize {
    let n = poly.len();
    let mut removed = 0;
    let mut changed = true;
    while changed && list.remaining >= 3 {
        changed = false;
        for i in 0..n {
            if !list.alive[i] || list.remaining < 3 {
                continue;
            }
            let (a, c) = (list.prev[i], list.next[i]);
            if poly[i] == poly[c] && i != c {
                // zero-length edge: drop one endpoint
                list.unlink(c);
                removed += 1;
                changed = true;
            } else if poly[a] == poly[c] && a != c {
                // spike: i sticks out and folds straight back
                list.unlink(i);
                list.unlink(c);
                removed += 2;
                changed = true;
            } else {
                let d1 = poly[i].sub(&poly[a]);
                let d2 = poly[c].sub(&poly[i]);
                if d1.cross(&d2).abs() <= EPS_ORIENT && d1.dot(&d2) > 0.0 {
                    // straight-through vertex: removing it changes nothing
                    list.unlink(i);
                    removed += 1;
                    changed = true;
                }
            }
        }
    }
    removed
}

/// Debug export: a triangulation as a GeoJSON MultiPolygon value.
pub fn triangulation_to_geojson(tris: &[Triangle]) -> serde_json::Value {
    let polys: Vec<serde_json::Value> = tris
        .iter()
        .map(|t| {
            serde_json::json!([[
                [t.q.x, t.q.y],
                [t.r.x, t.r.y],
                [t.s.x, t.s.y],
                [t.q.x, t.q.y]
            ]])
        })
        .collect();
    serde_json::json!({"type": "MultiPolygon", "coordinates": polys})
}

/// Do the interiors of two triangles from one partition overlap? Exact
/// orientation predicates only: a proper edge crossing or a strictly
/// interior vertex is the witness; shared edges and vertices are fine.
pub fn triangles_interior_overlap(t1: &Triangle, t2: &Triangle) -> bool {
    let e1 = [(t1.q, t1.r), (t1.r, t1.s), (t1.s, t1.q)];
    let e2 = [(t2.q, t2.r), (t2.r, t2.s), (t2.s, t2.q)];
    for (a1, a2) in &e1 {
        for (b1, b2) in &e2 {
            if crate::geometry::segments_properly_cross(a1, a2, b1, b2) {
                return true;
            }
        }
    }
    let strictly_in = |p: &Point2, t: &Triangle| {
        orient(&t.q, &t.r, p) > EPS_ORIENT
            && orient(&t.r, &t.s, p) > EPS_ORIENT
            && orient(&t.s, &t.q, p) > EPS_ORIENT
    };
    [t1.q, t1.r, t1.s].iter().any(|p| strictly_in(p, t2))
        || [t2.q, t2.r, t2.s].iter().any(|p| strictly_in(p, t1))
}

/// Is `p` inside the polygon region (for containment spot checks)?
pub fn polygon_contains(pg: &Polygon, p: &Point2) -> bool {
    point_in_polygon(p, pg) != Region::Exterior
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{parse_geometry, polygon_area, Format, Geometry};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn poly(wkt: &str) -> Polygon {
        match parse_geometry(wkt, Format::Wkt).unwrap() {
            Geometry::Polygon(pg) => pg,
            _ => panic!("expected polygon"),
        }
    }

    #[test]
    fn split_polyline_examples() {
        let out = split_polyline(&[pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 1.0)]).unwrap();
        assert_eq!(out.segments.len(), 2);
        assert_eq!(out.dropped, 0);
        assert_eq!(out.segments[0], Segment { q: pt(0.0, 0.0), r: pt(1.0, 0.0) });
        assert_eq!(out.segments[1], Segment { q: pt(1.0, 0.0), r: pt(1.0, 1.0) });

        let out = split_polyline(&[pt(0.0, 0.0), pt(2.0, 3.0)]).unwrap();
        assert_eq!(out.segments.len(), 1);

        // Duplicate vertex dropped, not fatal.
        let out = split_polyline(&[pt(0.0, 0.0), pt(0.0, 0.0), pt(1.0, 0.0)]).unwrap();
        assert_eq!(out.segments.len(), 1);
        assert_eq!(out.dropped, 1);
        assert_eq!(out.segments[0], Segment { q: pt(0.0, 0.0), r: pt(1.0, 0.0) });

        // All degenerate -> error.
        assert!(matches!(
            split_polyline(&[pt(0.0, 0.0), pt(0.0, 0.0)]),
            Err(TriangulateError::EmptyResult)
        ));
    }

    #[test]
    fn unit_square_two_triangles() {
        let tris = triangulate(&poly("POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))")).unwrap();
        assert_eq!(tris.len(), 2);
        let total: f64 = tris.iter().map(Triangle::area).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn convex_pentagon_three_triangles() {
        let pg = poly("POLYGON ((0 0, 2 0, 2.6 1.8, 1 3, -0.6 1.8, 0 0))");
        let tris = triangulate(&pg).unwrap();
        assert_eq!(tris.len(), 3);
        let total: f64 = tris.iter().map(Triangle::area).sum();
        assert!((total - polygon_area(&pg)).abs() < 1e-9 * polygon_area(&pg));
    }

    #[test]
    fn l_shape_four_triangles_all_contained() {
        let pg = poly("POLYGON ((0 0, 2 0, 2 1, 1 1, 1 2, 0 2, 0 0))");
        let tris = triangulate(&pg).unwrap();
        assert_eq!(tris.len(), 4);
        let total: f64 = tris.iter().map(Triangle::area).sum();
        assert!((total - 3.0).abs() < 1e-9 * 3.0);
        // Monte-Carlo containment: sample points in each triangle must lie in
        // the polygon.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let t = &tris[rng.gen_range(0..tris.len())];
            let (mut b1, mut b2) = (rng.gen::<f64>(), rng.gen::<f64>());
            if b1 + b2 > 1.0 {
                b1 = 1.0 - b1;
                b2 = 1.0 - b2;
            }
            let p = Point2::new(
                t.q.x + b1 * (t.r.x - t.q.x) + b2 * (t.s.x - t.q.x),
                t.q.y + b1 * (t.r.y - t.q.y) + b2 * (t.s.y - t.q.y),
            );
            assert!(polygon_contains(&pg, &p), "{p:?} escaped the polygon");
        }
    }

    #[test]
    fn square_with_hole() {
        let pg = poly(
            "POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0), (1 1, 2 1, 2 3, 1 3, 1 1))",
        );
        let tris = triangulate(&pg).unwrap();
        let total: f64 = tris.iter().map(Triangle::area).sum();
        assert!((total - 14.0).abs() < 1e-9 * 14.0, "area {total}");
        // Nothing may land inside the hole.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5_000 {
            let t = &tris[rng.gen_range(0..tris.len())];
            let (mut b1, mut b2) = (rng.gen::<f64>(), rng.gen::<f64>());
            if b1 + b2 > 1.0 {
                b1 = 1.0 - b1;
                b2 = 1.0 - b2;
            }
            let p = Point2::new(
                t.q.x + b1 * (t.r.x - t.q.x) + b2 * (t.s.x - t.q.x),
                t.q.y + b1 * (t.r.y - t.q.y) + b2 * (t.s.y - t.q.y),
            );
            assert!(polygon_contains(&pg, &p), "{p:?} escaped (or fell in the hole)");
        }
    }

    #[test]
    fn two_holes() {
        let pg = poly(
            "POLYGON ((0 0, 6 0, 6 4, 0 4, 0 0), (1 1, 2 1, 2 2, 1 2, 1 1), (4 2, 5 2, 5 3, 4 3, 4 2))",
        );
        let tris = triangulate(&pg).unwrap();
        let total: f64 = tris.iter().map(Triangle::area).sum();
        assert!((total - 22.0).abs() < 1e-9 * 22.0, "area {total}");
    }

    #[test]
    fn random_star_polygons_conserve_area() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for case in 0..200 {
            let n = rng.gen_range(4..=12);
            let mut angles: Vec<f64> =
                (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
            angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
            // Star-shaped around the origin: strictly increasing angles with
            // random radii always give a simple ring.
            let ok_gaps = angles.windows(2).all(|w| w[1] - w[0] > 1e-3);
            if !ok_gaps {
                continue;
            }
            let mut ring: Vec<Point2> = angles
                .iter()
                .map(|a| {
                    let r = rng.gen_range(0.2..1.0);
                    Point2::new(r * a.cos(), r * a.sin())
                })
                .collect();
            ring.push(ring[0]);
            let pg = Polygon { exterior: ring, holes: vec![] };
            if crate::geometry::validate(&Geometry::Polygon(pg.clone())).is_err() {
                continue;
            }
            let want = polygon_area(&pg);
            let tris = triangulate(&pg).unwrap_or_else(|e| panic!("case {case}: {e}"));
            let got: f64 = tris.iter().map(Triangle::area).sum();
            assert!(
                (got - want).abs() <= 1e-9 * want,
                "case {case}: got {got}, want {want}"
            );
            // Pairwise interior disjointness on the full set.
            for i in 0..tris.len() {
                for j in (i + 1)..tris.len() {
                    assert!(
                        !triangles_interior_overlap(&tris[i], &tris[j]),
                        "case {case}: triangles {i} and {j} overlap"
                    );
                }
            }
        }
    }

    #[test]
    fn boundary_edges_preserved() {
        // Constrained property: every input boundary edge appears among the
        // triangle edges (polygons without collinear vertex runs).
        for wkt in [
            "POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))",
            "POLYGON ((0 0, 2 0, 2 1, 1 1, 1 2, 0 2, 0 0))",
            "POLYGON ((0 0, 2 0, 2.6 1.8, 1 3, -0.6 1.8, 0 0))",
        ] {
            let pg = poly(wkt);
            let tris = triangulate(&pg).unwrap();
            let mut edges: Vec<(Point2, Point2)> = Vec::new();
            for t in &tris {
                edges.push((t.q, t.r));
                edges.push((t.r, t.s));
                edges.push((t.s, t.q));
            }
            for w in pg.exterior.windows(2) {
                let found = edges
                    .iter()
                    .any(|(a, b)| (*a == w[0] && *b == w[1]) || (*a == w[1] && *b == w[0]));
                assert!(found, "boundary edge {:?}-{:?} missing", w[0], w[1]);
            }
        }
    }

    #[test]
    fn near_collinear_vertices_handled() {
        // A vertex that is collinear with its neighbors to within 1e-15 —
        // below the orientation epsilon — must not break the clip.
        let pg = poly("POLYGON ((0 0, 0.5 1e-15, 1 0, 1 1, 0 1, 0 0))");
        let tris = triangulate(&pg).unwrap();
        let total: f64 = tris.iter().map(Triangle::area).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_triangle_and_segment_rejected() {
        assert!(Triangle::new(pt(0.0, 0.0), pt(1.0, 0.0), pt(2.0, 0.0)).is_err());
        assert!(Segment::new(pt(0.0, 0.0), pt(0.0, 0.0)).is_err());
        // CW input comes back CCW.
        let t = Triangle::new(pt(0.0, 0.0), pt(0.0, 1.0), pt(1.0, 0.0)).unwrap();
        assert!(t.area() > 0.0);
    }
}
