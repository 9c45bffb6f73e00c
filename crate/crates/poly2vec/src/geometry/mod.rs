//! Geometry data model: parsing, validation, normalization, centroids.
//!
//! Coordinates are dimensionless; the training pipeline normalizes everything
//! into [−1, 1]² before spectra are computed. Polygon rings are stored closed
//! (first vertex repeated at the end) and canonicalized at parse time:
//! exterior counter-clockwise, holes clockwise. Downstream code never has to
//! re-check orientation.

mod geojson;
mod prim;
mod wkt;

pub(crate) use prim::{
    orient, point_in_polygon, point_in_ring, point_on_segment, ring_is_simple, rings_intersect,
    segments_intersect, segments_properly_cross, Region, EPS_ORIENT,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Segments shorter than this (in normalized units) are treated as degenerate.
pub const EPS_SEGMENT: f64 = 1e-12;

/// A 2D point / position vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    #[inline]
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn sub(&self, o: &Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }

    #[inline]
    pub fn add(&self, o: &Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }

    #[inline]
    pub fn scale(&self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }

    #[inline]
    pub fn dot(&self, o: &Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn cross(&self, o: &Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// A polygon as closed rings: one exterior (CCW) plus zero or more holes (CW).
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub exterior: Vec<Point2>,
    pub holes: Vec<Vec<Point2>>,
}

/// The four supported geometry tags.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Point(Point2),
    Polyline(Vec<Point2>),
    Polygon(Polygon),
    MultiPolygon(Vec<Polygon>),
}

/// Axis-aligned box used for coordinate normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl BoundingBox {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Result<Self, GeometryError> {
        let bb = BoundingBox { min_x, min_y, max_x, max_y };
        bb.check()?;
        Ok(bb)
    }

    pub(crate) fn check(&self) -> Result<(), GeometryError> {
        if !(self.max_x > self.min_x) || !self.min_x.is_finite() || !self.max_x.is_finite() {
            return Err(GeometryError::DegenerateBBox { axis: 'x' });
        }
        if !(self.max_y > self.min_y) || !self.min_y.is_finite() || !self.max_y.is_finite() {
            return Err(GeometryError::DegenerateBBox { axis: 'y' });
        }
        Ok(())
    }

    /// The identity box for already-normalized data.
    pub fn unit() -> Self {
        BoundingBox { min_x: -1.0, min_y: -1.0, max_x: 1.0, max_y: 1.0 }
    }
}

/// Input formats accepted by [`parse_geometry`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Format {
    Wkt,
    GeoJson,
}

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unsupported geometry type `{0}`")]
    Unsupported(String),
    #[error("invalid geometry: {0}")]
    Validation(String),
    #[error("bounding box has zero extent on the {axis} axis")]
    DegenerateBBox { axis: char },
}

/// Parse one geometry from text, canonicalize ring orientation and validate.
pub fn parse_geometry(text: &str, format: Format) -> Result<Geometry, GeometryError> {
    let mut g = match format {
        Format::Wkt => wkt::parse(text)?,
        Format::GeoJson => geojson::parse(text)?,
    };
    canonicalize(&mut g);
    validate(&g)?;
    Ok(g)
}

/// Guess the format from the first non-space character ('{' means GeoJSON).
pub fn detect_format(text: &str) -> Format {
    match text.trim_start().as_bytes().first() {
        Some(b'{') => Format::GeoJson,
        _ => Format::Wkt,
    }
}

/// Serialize to WKT with shortest-round-trip number formatting.
pub fn to_wkt(g: &Geometry) -> String {
    wkt::write(g)
}

/// Serialize to a GeoJSON value (RFC 7946 [x, y] coordinate order).
pub fn to_geojson(g: &Geometry) -> serde_json::Value {
    geojson::write(g)
}

/// Parse a GeoJSON value directly (used by the dataset reader).
pub fn from_geojson_value(v: &serde_json::Value) -> Result<Geometry, GeometryError> {
    let mut g = geojson::from_value(v)?;
    canonicalize(&mut g);
    validate(&g)?;
    Ok(g)
}

/// Shoelace signed area of a closed ring; positive iff counter-clockwise.
///
/// The ring is traversed from a canonical starting vertex in a canonical
/// direction so that `signed_area(reverse(ring)) == -signed_area(ring)`
/// holds exactly, not just within rounding.
pub fn signed_area(ring: &[Point2]) -> f64 {
    let n = ring.len();
    if n < 4 {
        // A closed ring needs at least 3 distinct vertices + repeat.
        return 0.0;
    }
    let m = n - 1; // distinct vertices
    let lex = |p: &Point2, q: &Point2| (p.x, p.y) < (q.x, q.y);
    let mut start = 0;
    for i in 1..m {
        if lex(&ring[i], &ring[start]) {
            start = i;
        }
    }
    let next = (start + 1) % m;
    let prev = (start + m - 1) % m;
    // Walk toward the lexicographically smaller neighbor; remember whether
    // that matches the input ring's own direction.
    let forward = lex(&ring[next], &ring[prev]);
    let mut sum = 0.0;
    let mut i = start;
    for _ in 0..m {
        let j = if forward { (i + 1) % m } else { (i + m - 1) % m };
        sum += ring[i].x * ring[j].y - ring[j].x * ring[i].y;
        i = j;
    }
    let area = 0.5 * sum;
    if forward {
        area
    } else {
        -area
    }
}

/// Net polygon area: |exterior| minus the sum of |hole| areas.
pub fn polygon_area(pg: &Polygon) -> f64 {
    let mut a = signed_area(&pg.exterior).abs();
    for h in &pg.holes {
        a -= signed_area(h).abs();
    }
    a
}

/// Total area across all geometry parts (zero for points and polylines).
pub fn area(g: &Geometry) -> f64 {
    match g {
        Geometry::Point(_) | Geometry::Polyline(_) => 0.0,
        Geometry::Polygon(pg) => polygon_area(pg),
        Geometry::MultiPolygon(pgs) => pgs.iter().map(polygon_area).sum(),
    }
}

/// Centroid: the point itself; length-weighted segment midpoints for a
/// polyline; the shoelace area centroid (holes subtract) for polygons;
/// area-weighted combination for multipolygons.
pub fn centroid(g: &Geometry) -> Point2 {
    match g {
        Geometry::Point(p) => *p,
        Geometry::Polyline(pts) => {
            let mut len = 0.0;
            let mut cx = 0.0;
            let mut cy = 0.0;
            for w in pts.windows(2) {
                let l = w[1].sub(&w[0]).norm();
                len += l;
                cx += l * 0.5 * (w[0].x + w[1].x);
                cy += l * 0.5 * (w[0].y + w[1].y);
            }
            Point2::new(cx / len, cy / len)
        }
        Geometry::Polygon(pg) => {
            let (a, mx, my) = polygon_moments(pg);
            Point2::new(mx / a, my / a)
        }
        Geometry::MultiPolygon(pgs) => {
            let mut a = 0.0;
            let mut mx = 0.0;
            let mut my = 0.0;
            for pg in pgs {
                let (pa, px, py) = polygon_moments(pg);
                a += pa;
                mx += px;
                my += py;
            }
            Point2::new(mx / a, my / a)
        }
    }
}

/// Signed area and first moments over all rings. Exterior rings are CCW and
/// holes CW, so hole contributions subtract automatically.
fn polygon_moments(pg: &Polygon) -> (f64, f64, f64) {
    let mut a = 0.0;
    let mut mx = 0.0;
    let mut my = 0.0;
    for ring in std::iter::once(&pg.exterior).chain(pg.holes.iter()) {
        for w in ring.windows(2) {
            let cr = w[0].x * w[1].y - w[1].x * w[0].y;
            a += 0.5 * cr;
            mx += (w[0].x + w[1].x) * cr / 6.0;
            my += (w[0].y + w[1].y) * cr / 6.0;
        }
    }
    (a, mx, my)
}

/// Min/max coordinate bounds over every vertex of the geometry.
pub fn coord_bounds(g: &Geometry) -> (f64, f64, f64, f64) {
    let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut scan = |p: &Point2| {
        b.0 = b.0.min(p.x);
        b.1 = b.1.min(p.y);
        b.2 = b.2.max(p.x);
        b.3 = b.3.max(p.y);
    };
    for_each_point(g, &mut scan);
    b
}

fn for_each_point(g: &Geometry, f: &mut impl FnMut(&Point2)) {
    match g {
        Geometry::Point(p) => f(p),
        Geometry::Polyline(pts) => pts.iter().for_each(f),
        Geometry::Polygon(pg) => {
            pg.exterior.iter().for_each(&mut *f);
            pg.holes.iter().flatten().for_each(f);
        }
        Geometry::MultiPolygon(pgs) => {
            for pg in pgs {
                pg.exterior.iter().for_each(&mut *f);
                pg.holes.iter().flatten().for_each(&mut *f);
            }
        }
    }
}

/// Affinely map every coordinate so `bbox` becomes [−1, 1]²:
/// x' = 2(x − min_x)/(max_x − min_x) − 1, same per axis for y.
pub fn normalize(g: &Geometry, bbox: &BoundingBox) -> Result<Geometry, GeometryError> {
    bbox.check()?;
    let sx = bbox.max_x - bbox.min_x;
    let sy = bbox.max_y - bbox.min_y;
    let map = |p: &Point2| {
        Point2::new(2.0 * (p.x - bbox.min_x) / sx - 1.0, 2.0 * (p.y - bbox.min_y) / sy - 1.0)
    };
    Ok(map_points(g, &map))
}

fn map_points(g: &Geometry, f: &impl Fn(&Point2) -> Point2) -> Geometry {
    let map_ring = |r: &Vec<Point2>| r.iter().map(f).collect::<Vec<_>>();
    let map_pg = |pg: &Polygon| Polygon {
        exterior: map_ring(&pg.exterior),
        holes: pg.holes.iter().map(map_ring).collect(),
    };
    match g {
        Geometry::Point(p) => Geometry::Point(f(p)),
        Geometry::Polyline(pts) => Geometry::Polyline(pts.iter().map(f).collect()),
        Geometry::Polygon(pg) => Geometry::Polygon(map_pg(pg)),
        Geometry::MultiPolygon(pgs) => Geometry::MultiPolygon(pgs.iter().map(map_pg).collect()),
    }
}

/// Translate a geometry by (dx, dy). Used by the pair generator and the
/// translation-law property tests.
pub fn translate(g: &Geometry, dx: f64, dy: f64) -> Geometry {
    map_points(g, &|p: &Point2| Point2::new(p.x + dx, p.y + dy))
}

/// Flip ring orientations into canonical form: exterior CCW, holes CW.
fn canonicalize(g: &mut Geometry) {
    let fix = |pg: &mut Polygon| {
        if signed_area(&pg.exterior) < 0.0 {
            pg.exterior.reverse();
        }
        for h in &mut pg.holes {
            if signed_area(h) > 0.0 {
                h.reverse();
            }
        }
    };
    match g {
        Geometry::Polygon(pg) => fix(pg),
        Geometry::MultiPolygon(pgs) => pgs.iter_mut().for_each(fix),
        _ => {}
    }
}

/// Validate the geometry invariants. Parsers call this; generated geometries
/// go through it as well.
pub fn validate(g: &Geometry) -> Result<(), GeometryError> {
    let finite = |pts: &[Point2]| -> Result<(), GeometryError> {
        if pts.iter().all(Point2::is_finite) {
            Ok(())
        } else {
            Err(GeometryError::Validation("non-finite coordinate".into()))
        }
    };
    match g {
        Geometry::Point(p) => {
            if !p.is_finite() {
                return Err(GeometryError::Validation("non-finite coordinate".into()));
            }
        }
        Geometry::Polyline(pts) => {
            finite(pts)?;
            if pts.len() < 2 {
                return Err(GeometryError::Validation(
                    "polyline needs at least 2 vertices".into(),
                ));
            }
            if pts.first() == pts.last() {
                return Err(GeometryError::Validation(
                    "polyline must not be closed (first vertex equals last)".into(),
                ));
            }
            let ok = pts.windows(2).any(|w| w[1].sub(&w[0]).norm() > EPS_SEGMENT);
            if !ok {
                return Err(GeometryError::Validation(
                    "polyline has no segment of positive length".into(),
                ));
            }
        }
        Geometry::Polygon(pg) => validate_polygon(pg)?,
        Geometry::MultiPolygon(pgs) => {
            if pgs.is_empty() {
                return Err(GeometryError::Validation("empty multipolygon".into()));
            }
            for pg in pgs {
                validate_polygon(pg)?;
            }
        }
    }
    Ok(())
}

fn validate_ring(ring: &[Point2], what: &str) -> Result<(), GeometryError> {
    if !ring.iter().all(Point2::is_finite) {
        return Err(GeometryError::Validation("non-finite coordinate".into()));
    }
    if ring.len() < 4 {
        return Err(GeometryError::Validation(format!(
            "{what} ring needs at least 4 vertices including the closing repeat"
        )));
    }
    if ring.first() != ring.last() {
        return Err(GeometryError::Validation(format!("{what} ring is not closed")));
    }
    for w in ring.windows(2) {
        if w[0] == w[1] {
            return Err(GeometryError::Validation(format!(
                "{what} ring has a repeated consecutive vertex"
            )));
        }
    }
    if signed_area(ring).abs() <= 0.0 {
        return Err(GeometryError::Validation(format!("{what} ring has zero area")));
    }
    if !ring_is_simple(ring) {
        return Err(GeometryError::Validation(format!("{what} ring self-intersects")));
    }
    Ok(())
}

fn validate_polygon(pg: &Polygon) -> Result<(), GeometryError> {
    validate_ring(&pg.exterior, "exterior")?;
    if signed_area(&pg.exterior) < 0.0 {
        return Err(GeometryError::Validation("exterior ring must be CCW".into()));
    }
    for (i, h) in pg.holes.iter().enumerate() {
        validate_ring(h, "hole")?;
        if signed_area(h) > 0.0 {
            return Err(GeometryError::Validation("hole rings must be CW".into()));
        }
        // Strict containment: every hole vertex interior to the exterior ring
        // and no edge contact between the rings.
        for p in &h[..h.len() - 1] {
            if point_in_ring(p, &pg.exterior) != Region::Interior {
                return Err(GeometryError::Validation(
                    "hole not strictly inside exterior".into(),
                ));
            }
        }
        if rings_intersect(h, &pg.exterior) {
            return Err(GeometryError::Validation("hole touches exterior ring".into()));
        }
        for other in &pg.holes[..i] {
            if rings_intersect(h, other) {
                return Err(GeometryError::Validation("holes intersect each other".into()));
            }
            if point_in_ring(&h[0], other) == Region::Interior
                || point_in_ring(&other[0], h) == Region::Interior
            {
                return Err(GeometryError::Validation("hole nested inside another hole".into()));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn ring(coords: &[(f64, f64)]) -> Vec<Point2> {
        coords.iter().map(|&(x, y)| pt(x, y)).collect()
    }

    const UNIT_SQUARE: &[(f64, f64)] =
        &[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.0, 0.0)];

    #[test]
    fn parse_point_literal() {
        let g = parse_geometry("POINT (0.5 -0.25)", Format::Wkt).unwrap();
        assert_eq!(g, Geometry::Point(pt(0.5, -0.25)));
    }

    #[test]
    fn parse_unit_square() {
        let g = parse_geometry("POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))", Format::Wkt).unwrap();
        let Geometry::Polygon(pg) = &g else { panic!("expected polygon") };
        assert_eq!(pg.exterior.len(), 5);
        assert!(pg.holes.is_empty());
        assert_eq!(signed_area(&pg.exterior), 1.0);
    }

    #[test]
    fn parse_rejects_single_vertex_linestring() {
        let err = parse_geometry("LINESTRING (0 0)", Format::Wkt).unwrap_err();
        assert!(matches!(err, GeometryError::Validation(_)), "got {err:?}");
    }

    #[test]
    fn parse_canonicalizes_ring_orientation() {
        // Clockwise input comes back counter-clockwise.
        let g = parse_geometry("POLYGON ((0 0, 0 1, 1 1, 1 0, 0 0))", Format::Wkt).unwrap();
        let Geometry::Polygon(pg) = &g else { panic!() };
        assert!(signed_area(&pg.exterior) > 0.0);
    }

    #[test]
    fn validate_rejects_self_intersecting_ring() {
        // Bowtie.
        let err =
            parse_geometry("POLYGON ((0 0, 1 1, 1 0, 0 1, 0 0))", Format::Wkt).unwrap_err();
        assert!(matches!(err, GeometryError::Validation(_)), "got {err:?}");
    }

    #[test]
    fn validate_rejects_open_ring() {
        let err = parse_geometry(
            r#"{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1]]]}"#,
            Format::GeoJson,
        )
        .unwrap_err();
        assert!(matches!(err, GeometryError::Validation(_)), "got {err:?}");
    }

    #[test]
    fn validate_rejects_closed_polyline() {
        let err = parse_geometry("LINESTRING (0 0, 1 0, 0 0)", Format::Wkt).unwrap_err();
        assert!(matches!(err, GeometryError::Validation(_)), "got {err:?}");
    }

    #[test]
    fn unsupported_geometry_collection() {
        let err = parse_geometry(
            r#"{"type":"GeometryCollection","geometries":[]}"#,
            Format::GeoJson,
        )
        .unwrap_err();
        assert!(matches!(err, GeometryError::Unsupported(_)), "got {err:?}");
    }

    #[test]
    fn signed_area_unit_square() {
        assert_eq!(signed_area(&ring(UNIT_SQUARE)), 1.0);
        let mut cw = ring(UNIT_SQUARE);
        cw.reverse();
        assert_eq!(signed_area(&cw), -1.0);
    }

    #[test]
    fn signed_area_canonical_triangle() {
        let r = ring(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 0.0)]);
        assert_eq!(signed_area(&r), 0.5);
    }

    #[test]
    fn signed_area_reverse_is_exact_negation() {
        // Awkward coordinates so rounding would show up if traversal order
        // were not canonicalized inside signed_area.
        let r = ring(&[
            (0.123456789, -0.987654321),
            (0.8642097531, 0.1357908642),
            (0.7310582635, 0.6912043817),
            (-0.5555555555, 0.4444444444),
            (0.123456789, -0.987654321),
        ]);
        let mut rev = r.clone();
        rev.reverse();
        let a = signed_area(&r);
        let b = signed_area(&rev);
        assert_eq!(a.to_bits(), (-b).to_bits(), "{a} vs {b}");
    }

    #[test]
    fn normalize_maps_corners_and_center() {
        let bb = BoundingBox::new(2.0, 10.0, 6.0, 30.0).unwrap();
        let g = normalize(&Geometry::Point(pt(2.0, 10.0)), &bb).unwrap();
        assert_eq!(g, Geometry::Point(pt(-1.0, -1.0)));
        let g = normalize(&Geometry::Point(pt(4.0, 20.0)), &bb).unwrap();
        assert_eq!(g, Geometry::Point(pt(0.0, 0.0)));
    }

    #[test]
    fn normalize_square_example() {
        // bbox (0,0,10,10): square (2,2)-(4,4) maps to (−0.6,−0.6)-(−0.2,−0.2).
        let bb = BoundingBox::new(0.0, 0.0, 10.0, 10.0).unwrap();
        let g = parse_geometry("POLYGON ((2 2, 4 2, 4 4, 2 4, 2 2))", Format::Wkt).unwrap();
        let n = normalize(&g, &bb).unwrap();
        let Geometry::Polygon(pg) = &n else { panic!() };
        assert!((pg.exterior[0].x - -0.6).abs() < 1e-15);
        assert!((pg.exterior[0].y - -0.6).abs() < 1e-15);
        assert!((pg.exterior[2].x - -0.2).abs() < 1e-15);
        assert!((pg.exterior[2].y - -0.2).abs() < 1e-15);
    }

    #[test]
    fn normalize_is_idempotent_on_unit_box() {
        let g = parse_geometry("POLYGON ((-0.31 -0.7, 0.62 -0.1, 0.4 0.55, -0.31 -0.7))", Format::Wkt);
        let g = g.unwrap();
        let n = normalize(&g, &BoundingBox::unit()).unwrap();
        let (Geometry::Polygon(a), Geometry::Polygon(b)) = (&g, &n) else { panic!() };
        for (p, q) in a.exterior.iter().zip(&b.exterior) {
            assert!((p.x - q.x).abs() < 1e-12 && (p.y - q.y).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_bbox_rejected() {
        assert!(matches!(
            BoundingBox::new(0.0, 0.0, 0.0, 1.0),
            Err(GeometryError::DegenerateBBox { axis: 'x' })
        ));
    }

    #[test]
    fn centroid_examples() {
        assert_eq!(centroid(&Geometry::Point(pt(0.3, 0.7))), pt(0.3, 0.7));
        let sq = Geometry::Polygon(Polygon { exterior: ring(UNIT_SQUARE), holes: vec![] });
        let c = centroid(&sq);
        assert!((c.x - 0.5).abs() < 1e-15 && (c.y - 0.5).abs() < 1e-15);
        // Length-weighted midpoints: (0.5,0)·1 and (1,0.5)·1 average to (0.75, 0.25).
        let pl = Geometry::Polyline(ring(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)]));
        let c = centroid(&pl);
        assert!((c.x - 0.75).abs() < 1e-15 && (c.y - 0.25).abs() < 1e-15);
    }

    #[test]
    fn centroid_respects_holes() {
        // Square with a centered square hole keeps its centroid; an off-center
        // hole pushes the centroid the other way.
        let pg = Polygon {
            exterior: ring(&[(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (0.0, 4.0), (0.0, 0.0)]),
            holes: vec![{
                let mut h = ring(&[(1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (1.0, 2.0), (1.0, 1.0)]);
                h.reverse();
                h
            }],
        };
        let g = Geometry::Polygon(pg);
        validate(&g).unwrap();
        let c = centroid(&g);
        assert!(c.x > 2.0 && c.y > 2.0, "hole at lower-left pushes centroid up-right: {c:?}");
        assert!((area(&g) - 15.0).abs() < 1e-12);
    }

    #[test]
    fn centroid_multipolygon_area_weighted() {
        let unit = |dx: f64| Polygon {
            exterior: ring(&[(dx, 0.0), (dx + 1.0, 0.0), (dx + 1.0, 1.0), (dx, 1.0), (dx, 0.0)]),
            holes: vec![],
        };
        // Unit square at origin plus a 2×1 rectangle starting at x=2: areas 1 and 2.
        let wide = Polygon {
            exterior: ring(&[(2.0, 0.0), (4.0, 0.0), (4.0, 1.0), (2.0, 1.0), (2.0, 0.0)]),
            holes: vec![],
        };
        let g = Geometry::MultiPolygon(vec![unit(0.0), wide]);
        let c = centroid(&g);
        // (0.5·1 + 3.0·2)/3 = 6.5/3
        assert!((c.x - 6.5 / 3.0).abs() < 1e-12);
        assert!((c.y - 0.5).abs() < 1e-12);
    }

    #[test]
    fn wkt_round_trip_exact() {
        let texts = [
            "POINT (0.1234567890123457 -0.9876543210987654)",
            "LINESTRING (0 0, 0.3333333333333333 0.1, 1 1)",
            "POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0), (0.25 0.25, 0.25 0.75, 0.75 0.75, 0.75 0.25, 0.25 0.25))",
            "MULTIPOLYGON (((0 0, 1 0, 1 1, 0 1, 0 0)), ((2 0, 3 0, 3 1, 2 1, 2 0)))",
        ];
        for t in texts {
            let g = parse_geometry(t, Format::Wkt).unwrap();
            let back = parse_geometry(&to_wkt(&g), Format::Wkt).unwrap();
            assert_eq!(g, back, "round-trip failed for {t}");
        }
    }

    #[test]
    fn geojson_round_trip_exact() {
        let g = parse_geometry(
            "POLYGON ((0 0, 0.7071067811865476 0, 1 1, 0 1, 0 0))",
            Format::Wkt,
        )
        .unwrap();
        let back = from_geojson_value(&to_geojson(&g)).unwrap();
        assert_eq!(g, back);
        let pl = parse_geometry("LINESTRING (-0.1 0.2, 0.3 -0.4)", Format::Wkt).unwrap();
        let s = serde_json::to_string(&to_geojson(&pl)).unwrap();
        let back = parse_geometry(&s, Format::GeoJson).unwrap();
        assert_eq!(pl, back);
    }

    #[test]
    fn centroid_inside_bounds() {
        let g = parse_geometry("POLYGON ((0 0, 0.5 0.1, 1 0, 0.9 1, 0.1 0.9, 0 0))", Format::Wkt)
            .unwrap();
        let c = centroid(&g);
        let (minx, miny, maxx, maxy) = coord_bounds(&g);
        assert!(c.x >= minx && c.x <= maxx && c.y >= miny && c.y <= maxy);
    }

    #[test]
    fn validate_rejects_hole_outside() {
        let pg = Polygon {
            exterior: ring(UNIT_SQUARE),
            holes: vec![{
                let mut h =
                    ring(&[(2.0, 2.0), (3.0, 2.0), (3.0, 3.0), (2.0, 3.0), (2.0, 2.0)]);
                h.reverse();
                h
            }],
        };
        assert!(validate(&Geometry::Polygon(pg)).is_err());
    }
}
