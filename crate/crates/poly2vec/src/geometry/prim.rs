//! Low-level orientation and intersection primitives.
//!
//! Sign decisions use an absolute epsilon on the 2×2 cross determinant:
//! cross values within [`EPS_ORIENT`] of zero are treated as zero
//! (collinear). This is sound for the coordinate ranges this crate works
//! in — everything downstream of normalization lives in [−1, 1]², where
//! honest rounding noise stays around 1e−16 while deliberately constructed
//! degeneracies (shared vertices, points placed on segments) land well
//! inside the epsilon. The synthetic pair generator keeps all *near*-misses
//! at least 1e−3 away from boundaries, so no real decision ever sits in the
//! gray zone.

use super::Point2;

/// Absolute epsilon for orientation-determinant sign decisions.
pub(crate) const EPS_ORIENT: f64 = 1e-14;

/// Twice the signed area of triangle (a, b, c): cross(b−a, c−a).
/// Positive iff the triple turns counter-clockwise.
#[inline]
pub(crate) fn orient(a: &Point2, b: &Point2, c: &Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Sign of an orientation value with the epsilon snap to zero.
#[inline]
pub(crate) fn orient_sign(a: &Point2, b: &Point2, c: &Point2) -> i8 {
    let d = orient(a, b, c);
    if d > EPS_ORIENT {
        1
    } else if d < -EPS_ORIENT {
        -1
    } else {
        0
    }
}

/// Does p lie on segment [a, b] (endpoints included)?
pub(crate) fn point_on_segment(p: &Point2, a: &Point2, b: &Point2) -> bool {
    if orient_sign(a, b, p) != 0 {
        return false;
    }
    within_box(p, a, b)
}

/// Bounding-box containment used after a collinearity decision.
#[inline]
fn within_box(p: &Point2, a: &Point2, b: &Point2) -> bool {
    let (lo_x, hi_x) = if a.x <= b.x { (a.x, b.x) } else { (b.x, a.x) };
    let (lo_y, hi_y) = if a.y <= b.y { (a.y, b.y) } else { (b.y, a.y) };
    p.x >= lo_x - EPS_ORIENT
        && p.x <= hi_x + EPS_ORIENT
        && p.y >= lo_y - EPS_ORIENT
        && p.y <= hi_y + EPS_ORIENT
}

/// Do segments [p1,p2] and [q1,q2] share any point (touching counts)?
pub(crate) fn segments_intersect(p1: &Point2, p2: &Point2, q1: &Point2, q2: &Point2) -> bool {
    let d1 = orient_sign(q1, q2, p1);
    let d2 = orient_sign(q1, q2, p2);
    let d3 = orient_sign(p1, p2, q1);
    let d4 = orient_sign(p1, p2, q2);
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && within_box(p1, q1, q2))
        || (d2 == 0 && within_box(p2, q1, q2))
        || (d3 == 0 && within_box(q1, p1, p2))
        || (d4 == 0 && within_box(q2, p1, p2))
}

/// Do the segment *interiors* cross at a single point (no touching,
/// no collinear overlap)?
pub(crate) fn segments_properly_cross(
    p1: &Point2,
    p2: &Point2,
    q1: &Point2,
    q2: &Point2,
) -> bool {
    let d1 = orient_sign(q1, q2, p1);
    let d2 = orient_sign(q1, q2, p2);
    let d3 = orient_sign(p1, p2, q1);
    let d4 = orient_sign(p1, p2, q2);
    d1 * d2 < 0 && d3 * d4 < 0
}

/// Is a closed ring simple? Adjacent edges may share only their common
/// vertex (no spikes); non-adjacent edges must not touch at all.
pub(crate) fn ring_is_simple(ring: &[Point2]) -> bool {
    let m = ring.len() - 1; // edge count
    for i in 0..m {
        let (a1, a2) = (&ring[i], &ring[i + 1]);
        for j in (i + 1)..m {
            let (b1, b2) = (&ring[j], &ring[j + 1]);
            let adjacent = j == i + 1 || (i == 0 && j == m - 1);
            if adjacent {
                // Shared vertex w; the other two endpoints must not fold back
                // onto the neighbor edge.
                let (w, a, b) = if j == i + 1 { (a2, a1, b2) } else { (a1, b1, a2) };
                let da = Point2::new(w.x - a.x, w.y - a.y);
                let db = Point2::new(b.x - w.x, b.y - w.y);
                if da.cross(&db).abs() <= EPS_ORIENT && da.dot(&db) < 0.0 {
                    return false; // spike: edge doubles back on itself
                }
            } else if segments_intersect(a1, a2, b1, b2) {
                return false;
            }
        }
    }
    true
}

/// Any contact (crossing, touching, collinear overlap) between two rings?
pub(crate) fn rings_intersect(a: &[Point2], b: &[Point2]) -> bool {
    for ea in a.windows(2) {
        for eb in b.windows(2) {
            if segments_intersect(&ea[0], &ea[1], &eb[0], &eb[1]) {
                return true;
            }
        }
    }
    false
}

/// Classification of a point against a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Region {
    Interior,
    Boundary,
    Exterior,
}

/// Even-odd ray cast against one closed ring, with an explicit boundary
/// pre-check so points on edges never fall through to the parity test.
pub(crate) fn point_in_ring(p: &Point2, ring: &[Point2]) -> Region {
    for e in ring.windows(2) {
        if point_on_segment(p, &e[0], &e[1]) {
            return Region::Boundary;
        }
    }
    let mut inside = false;
    for e in ring.windows(2) {
        let (a, b) = (&e[0], &e[1]);
        // Half-open rule in y so a vertex exactly at p.y counts once.
        if (a.y > p.y) != (b.y > p.y) {
            let t = (p.y - a.y) / (b.y - a.y);
            let x = a.x + t * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    if inside {
        Region::Interior
    } else {
        Region::Exterior
    }
}

/// Point region against a polygon with holes.
pub(crate) fn point_in_polygon(p: &Point2, pg: &super::Polygon) -> Region {
    match point_in_ring(p, &pg.exterior) {
        Region::Exterior => Region::Exterior,
        Region::Boundary => Region::Boundary,
        Region::Interior => {
            for h in &pg.holes {
                match point_in_ring(p, h) {
                    Region::Interior => return Region::Exterior, // inside a hole
                    Region::Boundary => return Region::Boundary,
                    Region::Exterior => {}
                }
            }
            Region::Interior
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    #[test]
    fn orientation_signs() {
        assert_eq!(orient_sign(&pt(0.0, 0.0), &pt(1.0, 0.0), &pt(0.0, 1.0)), 1);
        assert_eq!(orient_sign(&pt(0.0, 0.0), &pt(0.0, 1.0), &pt(1.0, 0.0)), -1);
        assert_eq!(orient_sign(&pt(0.0, 0.0), &pt(1.0, 1.0), &pt(0.5, 0.5)), 0);
        // Inside the epsilon snap: treated as collinear.
        assert_eq!(orient_sign(&pt(0.0, 0.0), &pt(1.0, 0.0), &pt(0.5, 1e-15)), 0);
    }

    #[test]
    fn segment_intersection_cases() {
        let (a, b) = (pt(0.0, 0.0), pt(1.0, 1.0));
        // Proper crossing.
        assert!(segments_properly_cross(&a, &b, &pt(0.0, 1.0), &pt(1.0, 0.0)));
        assert!(segments_intersect(&a, &b, &pt(0.0, 1.0), &pt(1.0, 0.0)));
        // Endpoint touch: intersects but not properly.
        assert!(segments_intersect(&a, &b, &pt(1.0, 1.0), &pt(2.0, 0.0)));
        assert!(!segments_properly_cross(&a, &b, &pt(1.0, 1.0), &pt(2.0, 0.0)));
        // Collinear overlap.
        assert!(segments_intersect(&a, &b, &pt(0.5, 0.5), &pt(2.0, 2.0)));
        assert!(!segments_properly_cross(&a, &b, &pt(0.5, 0.5), &pt(2.0, 2.0)));
        // Parallel, separate.
        assert!(!segments_intersect(&a, &b, &pt(0.0, 0.5), &pt(0.5, 1.0)));
        // Collinear, disjoint spans.
        assert!(!segments_intersect(&a, &b, &pt(1.5, 1.5), &pt(2.0, 2.0)));
    }

    #[test]
    fn point_on_segment_cases() {
        let (a, b) = (pt(-1.0, -1.0), pt(1.0, 1.0));
        assert!(point_on_segment(&pt(0.0, 0.0), &a, &b));
        assert!(point_on_segment(&pt(1.0, 1.0), &a, &b));
        assert!(!point_on_segment(&pt(1.1, 1.1), &a, &b));
        assert!(!point_on_segment(&pt(0.0, 0.1), &a, &b));
    }

    #[test]
    fn ring_simplicity() {
        let square = [pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 1.0), pt(0.0, 1.0), pt(0.0, 0.0)];
        assert!(ring_is_simple(&square));
        let bowtie = [pt(0.0, 0.0), pt(1.0, 1.0), pt(1.0, 0.0), pt(0.0, 1.0), pt(0.0, 0.0)];
        assert!(!ring_is_simple(&bowtie));
        // Spike: path doubles back along its own edge.
        let spike = [pt(0.0, 0.0), pt(1.0, 0.0), pt(0.5, 0.0), pt(0.5, 1.0), pt(0.0, 0.0)];
        assert!(!ring_is_simple(&spike));
    }

    #[test]
    fn point_in_ring_regions() {
        let square = [pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 1.0), pt(0.0, 1.0), pt(0.0, 0.0)];
        assert_eq!(point_in_ring(&pt(0.5, 0.5), &square), Region::Interior);
        assert_eq!(point_in_ring(&pt(0.5, 0.0), &square), Region::Boundary);
        assert_eq!(point_in_ring(&pt(0.0, 0.0), &square), Region::Boundary);
        assert_eq!(point_in_ring(&pt(1.5, 0.5), &square), Region::Exterior);
        assert_eq!(point_in_ring(&pt(-0.5, 0.0), &square), Region::Exterior);
        // Ray through a vertex must count correctly.
        let diamond = [pt(0.0, -1.0), pt(1.0, 0.0), pt(0.0, 1.0), pt(-1.0, 0.0), pt(0.0, -1.0)];
        assert_eq!(point_in_ring(&pt(-0.5, 0.0), &diamond), Region::Interior);
        assert_eq!(point_in_ring(&pt(-1.5, 0.0), &diamond), Region::Exterior);
    }

    #[test]
    fn point_in_polygon_with_hole() {
        let pg = super::super::Polygon {
            exterior: vec![pt(0.0, 0.0), pt(4.0, 0.0), pt(4.0, 4.0), pt(0.0, 4.0), pt(0.0, 0.0)],
            holes: vec![vec![pt(1.0, 1.0), pt(1.0, 3.0), pt(3.0, 3.0), pt(3.0, 1.0), pt(1.0, 1.0)]],
        };
        assert_eq!(point_in_polygon(&pt(0.5, 0.5), &pg), Region::Interior);
        assert_eq!(point_in_polygon(&pt(2.0, 2.0), &pg), Region::Exterior); // in hole
        assert_eq!(point_in_polygon(&pt(1.0, 2.0), &pg), Region::Boundary); // hole edge
        assert_eq!(point_in_polygon(&pt(5.0, 5.0), &pg), Region::Exterior);
    }
}
