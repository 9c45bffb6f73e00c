//! Brute-force numerical integration used to validate every closed-form
//! transform in this crate.
//!
//! Nothing here shares code with the analytic formulas: segments are
//! integrated as arc-length line integrals with composite Gauss–Legendre
//! panels, and triangles with an adaptive scheme that applies a tensor
//! Gauss–Legendre rule through the Duffy transform (square → triangle,
//! Jacobian absorbs the collapsed corner) on each cell and bisects the
//! longest edge until the parent-vs-children estimate meets the tolerance.
//! The fixed per-cell rule is validated in tests against exact monomial
//! integrals, and the integrands at |u|,|v| ≤ 1 are mildly oscillatory at
//! worst, so a few subdivision levels suffice.

use crate::geometry::{orient, Point2};
use crate::triangulate::{Segment, Triangle};
use num_complex::Complex64;
use thiserror::Error;

/// Subdivision budget for one adaptive integral.
pub const MAX_CELLS: usize = 1 << 20;

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("adaptive quadrature did not converge within {MAX_CELLS} cells (est. error {est:e})")]
    NoConvergence { est: f64 },
    #[error("tolerance {0:e} outside the supported range (1e-12, 1e-3)")]
    BadTolerance(f64),
}

/// Outcome of an adaptive integral: value, accumulated error estimate, and
/// how many cells were evaluated.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub est_error: f64,
    pub cells: usize,
}

/// Gauss–Legendre nodes and weights on [−1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n and P'_n at x via the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n, p0 = P_{n−1}
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

#[inline]
fn kernel(u: f64, v: f64, p: &Point2) -> Complex64 {
    let theta = std::f64::consts::TAU * (u * p.x + v * p.y);
    let (s, c) = theta.sin_cos();
    Complex64::new(c, -s)
}

/// Arc-length line integral ∫ e^{−j2π(ux+vy)} dℓ along the segment,
/// approximated with composite 16-point Gauss–Legendre panels using at
/// least `n` total points.
pub fn quad_segment(seg: &Segment, u: f64, v: f64, n: usize) -> Complex64 {
    const PANEL: usize = 16;
    let panels = n.div_ceil(PANEL).max(4);
    let (nodes, weights) = gauss_legendre(PANEL);
    let d = seg.r.sub(&seg.q);
    let len = d.norm();
    let mut sum = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let t0 = p as f64 / panels as f64;
        let t1 = (p + 1) as f64 / panels as f64;
        let half = 0.5 * (t1 - t0);
        let mid = 0.5 * (t0 + t1);
        for (x, w) in nodes.iter().zip(&weights) {
            let t = mid + half * x;
            let point = Point2::new(seg.q.x + t * d.x, seg.q.y + t * d.y);
            sum += kernel(u, v, &point) * (w * half);
        }
    }
    sum * len
}

/// Per-cell cubature: tensor Gauss–Legendre through the Duffy map
/// (a, b) ∈ [0,1]² ↦ q + a(r−q) + ab(s−r), Jacobian 2·area·a.
struct TriRule {
    /// Precomputed (a, ab, weight·a) triples on the unit square.
    pts: Vec<(f64, f64, f64)>,
}

impl TriRule {
    fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        // Map [−1,1] → [0,1].
        let map = |x: f64| 0.5 * (x + 1.0);
        let mut pts = Vec::with_capacity(n * n);
        for (xa, wa) in nodes.iter().zip(&weights) {
            let a = map(*xa);
            for (xb, wb) in nodes.iter().zip(&weights) {
                let b = map(*xb);
                pts.push((a, a * b, 0.25 * wa * wb * a));
            }
        }
        TriRule { pts }
    }

    fn apply(&self, q: &Point2, r: &Point2, s: &Point2, u: f64, v: f64) -> Complex64 {
        let e1 = r.sub(q);
        let e2 = s.sub(r);
        let jac = (e1.x * e2.y - e1.y * e2.x).abs();
        let mut sum = Complex64::new(0.0, 0.0);
        for &(a, ab, w) in &self.pts {
            let p = Point2::new(q.x + a * e1.x + ab * e2.x, q.y + a * e1.y + ab * e2.y);
            sum += kernel(u, v, &p) * w;
        }
        sum * jac
    }
}

/// ∬ e^{−j2π(ux+vy)} dx dy over a triangle, adaptively refined until the
/// estimated error is below tol·(1 + |result|).
pub fn quad_triangle(tri: &Triangle, u: f64, v: f64, tol: f64) -> Result<QuadResult, QuadError> {
    if !(tol > 1e-12 && tol < 1e-3) {
        return Err(QuadError::BadTolerance(tol));
    }
    let rule = TriRule::new(8);
    quad_triangle_with_rule(&rule, tri, u, v, tol)
}

fn quad_triangle_with_rule(
    rule: &TriRule,
    tri: &Triangle,
    u: f64,
    v: f64,
    tol: f64,
) -> Result<QuadResult, QuadError> {
    type Cell = (Point2, Point2, Point2);
    let whole = rule.apply(&tri.q, &tri.r, &tri.s, u, v);
    let scale = 1.0 + whole.norm();
    let total_area = tri.area();
    let cell_area = |c: &Cell| 0.5 * orient(&c.0, &c.1, &c.2).abs();

    let mut stack: Vec<(Cell, Complex64)> = vec![((tri.q, tri.r, tri.s), whole)];
    let mut value = Complex64::new(0.0, 0.0);
    let mut est_error = 0.0;
    let mut cells = 1usize;
    while let Some((cell, parent_value)) = stack.pop() {
        cells += 2;
        if cells > MAX_CELLS {
            return Err(QuadError::NoConvergence { est: est_error });
        }
        // Bisect the longest edge.
        let (a, b, c) = cell;
        let (lab, lbc, lca) =
            (b.sub(&a).norm(), c.sub(&b).norm(), a.sub(&c).norm());
        let (p1, p2, opp) = if lab >= lbc && lab >= lca {
            (a, b, c)
        } else if lbc >= lca {
            (b, c, a)
        } else {
            (c, a, b)
        };
        let mid = Point2::new(0.5 * (p1.x + p2.x), 0.5 * (p1.y + p2.y));
        let c1 = (p1, mid, opp);
        let c2 = (mid, p2, opp);
        let v1 = rule.apply(&c1.0, &c1.1, &c1.2, u, v);
        let v2 = rule.apply(&c2.0, &c2.1, &c2.2, u, v);
        let err = (parent_value - (v1 + v2)).norm();
        if err <= tol * scale * (cell_area(&cell) / total_area) {
            value += v1 + v2;
            est_error += err;
        } else {
            stack.push((c1, v1));
            stack.push((c2, v2));
        }
    }
    Ok(QuadResult { value, est_error, cells })
}

/// Sum of [`quad_triangle`] over a triangulation of the polygon.
pub fn quad_polygon(
    pg: &crate::geometry::Polygon,
    u: f64,
    v: f64,
    tol: f64,
) -> Result<QuadResult, QuadError> {
    let tris = crate::triangulate::triangulate(pg)
        .expect("quad_polygon precondition: polygon must triangulate");
    let rule = TriRule::new(8);
    let mut value = Complex64::new(0.0, 0.0);
    let mut est_error = 0.0;
    let mut cells = 0;
    for t in &tris {
        let r = quad_triangle_with_rule(&rule, t, u, v, tol)?;
        value += r.value;
        est_error += r.est_error;
        cells += r.cells;
    }
    Ok(QuadResult { value, est_error, cells })
}
