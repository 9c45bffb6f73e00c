//! Closed-form 2D continuous Fourier transforms.
//!
//! Every geometry is treated as a measure on the plane — a Dirac impulse for
//! a point, arc length for a polyline, an indicator function for a polygon —
//! and its transform F(u,v) = ∬ f(x,y) e^{−j2π(ux+vy)} dx dy is evaluated
//! exactly:
//!
//! * point: a pure phase, e^{−j2π(x_p u + y_p v)};
//! * segment: ‖q−r‖² · e^{−j2π m·(u,v)} · sinc((r−q)·(u,v)) with m the
//!   midpoint (the prefactor makes the value at the origin the squared
//!   length);
//! * triangle: the canonical right triangle (0,0),(1,0),(1,1) has a closed
//!   form with removable singularities on u = 0, v = 0, and u + v = 0;
//!   every other triangle is an affine image of it, so its transform is the
//!   canonical one, frequency-warped, phase-shifted, and area-scaled;
//! * polyline / polygon: sums of the above over split segments or a
//!   triangulation — any partition of the region gives the same spectrum,
//!   which is what makes triangulation quality irrelevant.
//!
//! All closed forms are validated against the quadrature oracle in
//! [`crate::quadrature`], which shares no code with this module.

use crate::geometry::{Geometry, Point2, Polygon};
use crate::grid::FrequencyGrid;
use crate::triangulate::{split_polyline, triangulate, Segment, Triangle, TriangulateError};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};
use std::io::{Read, Write};
use thiserror::Error;

/// Width of the removable-singularity branches of the canonical-triangle
/// transform: |u|, |v|, or |u+v| at or below this uses the limit formula.
pub const EPS_SING: f64 = 1e-6;

/// Normalized cardinal sine sin(πt)/(πt), with the removable singularity
/// filled by its Taylor expansion.
pub fn sinc(t: f64) -> f64 {
    let x = PI * t;
    if t.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// e^{−jθ}.
#[inline]
fn unit_phase(theta: f64) -> Complex64 {
    let (s, c) = theta.sin_cos();
    Complex64::new(c, -s)
}

/// Transform of a point mass at `p`: unit magnitude, phase −2π(x_p u + y_p v).
pub fn cft_point_at(p: &Point2, u: f64, v: f64) -> Complex64 {
    unit_phase(TAU * (p.x * u + p.y * v))
}

/// Transform of a segment. Value at (0,0) is the squared length.
pub fn cft_segment_at(seg: &Segment, u: f64, v: f64) -> Complex64 {
    cft_segment_at_with(seg, u, v, sinc)
}

/// Segment transform with an injectable sinc, so self-checks can corrupt the
/// kernel and prove the oracle notices. Not part of the public contract.
#[doc(hidden)]
pub fn cft_segment_at_with(
    seg: &Segment,
    u: f64,
    v: f64,
    sinc_fn: impl Fn(f64) -> f64,
) -> Complex64 {
    let d = seg.r.sub(&seg.q);
    let l2 = d.x * d.x + d.y * d.y;
    let theta = TAU * (0.5 * (seg.q.x + seg.r.x) * u + 0.5 * (seg.q.y + seg.r.y) * v);
    unit_phase(theta) * (l2 * sinc_fn(d.x * u + d.y * v))
}

/// Transform of the canonical right triangle (0,0), (1,0), (1,1), i.e.
/// ∬ over {0 ≤ x ≤ 1, 0 ≤ y ≤ x} of e^{−j2π(ux+vy)}. Total function: the
/// removable singularities on the lines u = 0, v = 0, u + v = 0 switch to
/// limit formulas inside a band of width [`EPS_SING`] (points in the band
/// are projected onto the line, so the branch error stays O(EPS_SING)).
pub fn cft_canonical_triangle(u: f64, v: f64) -> Complex64 {
    let on_u = u.abs() <= EPS_SING;
    let on_v = v.abs() <= EPS_SING;
    if on_u && on_v {
        return Complex64::new(0.5, 0.0);
    }
    if on_u {
        // F(0,v) = (1 − cos 2πv + j(sin 2πv − 2πv)) / (2πv)²
        let b = TAU * v;
        let c = 1.0 / (b * b);
        return Complex64::new(c * (1.0 - b.cos()), c * (b.sin() - b));
    }
    if on_v {
        // F(u,0) = ((cos a + a sin a − 1) − j(sin a − a cos a)) / a², a = 2πu
        let a = TAU * u;
        let c = 1.0 / (a * a);
        return Complex64::new(c * (a.cos() + a * a.sin() - 1.0), -c * (a.sin() - a * a.cos()));
    }
    if (u + v).abs() <= EPS_SING {
        // F(−w,w) = (1 − cos b + j(b − sin b)) / b², b = 2πw, with (u,v)
        // projected onto the line u + v = 0.
        let w = 0.5 * (v - u);
        let b = TAU * w;
        let c = 1.0 / (b * b);
        return Complex64::new(c * (1.0 - b.cos()), c * (b - b.sin()));
    }
    let c = 1.0 / (4.0 * PI * PI * u * v * (u + v));
    let (su, cu) = (TAU * u).sin_cos();
    let (suv, cuv) = (TAU * (u + v)).sin_cos();
    Complex64::new(
        c * ((u + v) * cu - u * cuv - v),
        -c * ((u + v) * su - u * suv),
    )
}

/// Transform of an arbitrary triangle, by affine change of variables onto
/// the canonical one: with edges e1 = r−q, e2 = s−r, the map
/// ξ ↦ q + [e1 | e2] ξ sends the canonical triangle onto this one, so
/// F(u,v) = |det| · e^{−j2π q·(u,v)} · F_canonical(e1·(u,v), e2·(u,v)).
/// Value at (0,0) is the area. Invariant under vertex rotation/relabeling.
pub fn cft_triangle_at(tri: &Triangle, u: f64, v: f64) -> Complex64 {
    let e1 = tri.r.sub(&tri.q);
    let e2 = tri.s.sub(&tri.r);
    let diag = tri.s.sub(&tri.q);
    let det = (e1.x * diag.y - e1.y * diag.x).abs();
    let wu = e1.x * u + e1.y * v;
    let wv = e2.x * u + e2.y * v;
    unit_phase(TAU * (tri.q.x * u + tri.q.y * v)) * cft_canonical_triangle(wu, wv) * det
}

/// A geometry reduced to the primitive parts its spectrum sums over.
/// Decomposing once and evaluating many frequencies avoids re-triangulating
/// per sample.
#[derive(Debug, Clone)]
pub enum SpectralParts {
    Point(Point2),
    Segments(Vec<Segment>),
    Triangles(Vec<Triangle>),
}

/// Split a geometry into its spectral parts (segments for polylines, a
/// triangulation for polygons; multipolygons pool every member's triangles).
pub fn decompose(g: &Geometry) -> Result<SpectralParts, TriangulateError> {
    match g {
        Geometry::Point(p) => Ok(SpectralParts::Point(*p)),
        Geometry::Polyline(pts) => Ok(SpectralParts::Segments(split_polyline(pts)?.segments)),
        Geometry::Polygon(pg) => Ok(SpectralParts::Triangles(triangulate(pg)?)),
        Geometry::MultiPolygon(pgs) => {
            let mut tris = Vec::new();
            for pg in pgs {
                tris.extend(triangulate(pg)?);
            }
            Ok(SpectralParts::Triangles(tris))
        }
    }
}

/// Evaluate the spectrum of decomposed parts at one frequency. Part sums use
/// pairwise summation to bound cancellation error for many-part geometries.
pub fn spectrum_value_at(parts: &SpectralParts, u: f64, v: f64) -> Complex64 {
    match parts {
        SpectralParts::Point(p) => cft_point_at(p, u, v),
        SpectralParts::Segments(segs) => pairwise_sum(segs, &|s| cft_segment_at(s, u, v)),
        SpectralParts::Triangles(tris) => pairwise_sum(tris, &|t| cft_triangle_at(t, u, v)),
    }
}

fn pairwise_sum<T, F: Fn(&T) -> Complex64>(xs: &[T], f: &F) -> Complex64 {
    match xs.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => f(&xs[0]),
        2 => f(&xs[0]) + f(&xs[1]),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a, f) + pairwise_sum(b, f)
        }
    }
}

/// A spectrum sampled on a [`FrequencyGrid`], index-aligned with the grid's
/// sample list and tagged with the grid's fingerprint.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    pub values: Vec<Complex64>,
    pub grid_id: u64,
}

fn sample_spectrum(parts: &SpectralParts, grid: &FrequencyGrid) -> ComplexSpectrum {
    let values = grid
        .samples()
        .iter()
        .map(|&(u, v)| spectrum_value_at(parts, u, v))
        .collect();
    ComplexSpectrum { values, grid_id: grid.id() }
}

pub fn cft_point(p: &Point2, grid: &FrequencyGrid) -> ComplexSpectrum {
    sample_spectrum(&SpectralParts::Point(*p), grid)
}

pub fn cft_segment(seg: &Segment, grid: &FrequencyGrid) -> ComplexSpectrum {
    sample_spectrum(&SpectralParts::Segments(vec![seg.clone()]), grid)
}

pub fn cft_triangle(tri: &Triangle, grid: &FrequencyGrid) -> ComplexSpectrum {
    sample_spectrum(&SpectralParts::Triangles(vec![*tri]), grid)
}

pub fn cft_polyline(
    pts: &[Point2],
    grid: &FrequencyGrid,
) -> Result<ComplexSpectrum, TriangulateError> {
    let segs = split_polyline(pts)?.segments;
    Ok(sample_spectrum(&SpectralParts::Segments(segs), grid))
}

pub fn cft_polygon(
    pg: &Polygon,
    grid: &FrequencyGrid,
) -> Result<ComplexSpectrum, TriangulateError> {
    Ok(sample_spectrum(&SpectralParts::Triangles(triangulate(pg)?), grid))
}

/// Dispatch on the geometry tag. The result has one complex value per grid
/// sample regardless of geometry type — the fixed-width property the rest
/// of the pipeline depends on.
pub fn encode_spectrum(
    g: &Geometry,
    grid: &FrequencyGrid,
) -> Result<ComplexSpectrum, TriangulateError> {
    Ok(sample_spectrum(&decompose(g)?, grid))
}

// ---------------------------------------------------------------------------
// Serialization: CSV for inspection, "P2VS" little-endian binary for bulk.

pub const SPECTRUM_MAGIC: [u8; 4] = *b"P2VS";
pub const SPECTRUM_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SpectrumIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("not a spectrum file: bad magic")]
    BadMagic,
    #[error("unsupported spectrum file version {0}")]
    BadVersion(u32),
    #[error("spectrum file corrupt: {0}")]
    Corrupt(&'static str),
}

/// CSV dump of one spectrum: a `# config: <hex>` provenance comment, a
/// header, then one `index,u,v,re,im` row per grid sample.
pub fn spectrum_to_csv(spec: &ComplexSpectrum, grid: &FrequencyGrid, config_hash: &str) -> String {
    use std::fmt::Write as _;
    assert_eq!(spec.values.len(), grid.len(), "spectrum/grid length mismatch");
    let mut out = format!("# config: {config_hash}\nindex,u,v,re,im\n");
    // Avoid "-0" rows: negative zero compares equal to zero, prints differently.
    let clean = |x: f64| if x == 0.0 { 0.0 } else { x };
    for (i, ((u, v), z)) in grid.samples().iter().zip(&spec.values).enumerate() {
        writeln!(out, "{i},{u},{v},{},{}", clean(z.re), clean(z.im)).unwrap();
    }
    out
}

/// Write flat f64 pairs: magic, version, pair count, payload, then a 32-byte
/// config-hash footer so the producing run is always identifiable.
pub fn write_pairs(
    w: &mut impl Write,
    pairs: &[(f64, f64)],
    config_hash: &[u8; 32],
) -> Result<(), SpectrumIoError> {
    w.write_all(&SPECTRUM_MAGIC)?;
    w.write_all(&SPECTRUM_VERSION.to_le_bytes())?;
    let count = u32::try_from(pairs.len()).map_err(|_| SpectrumIoError::Corrupt("too many pairs"))?;
    w.write_all(&count.to_le_bytes())?;
    for &(a, b) in pairs {
        w.write_all(&a.to_le_bytes())?;
        w.write_all(&b.to_le_bytes())?;
    }
    w.write_all(config_hash)?;
    Ok(())
}

/// Inverse of [`write_pairs`]; rejects bad magic, unknown versions, and
/// truncated or oversized files.
pub fn read_pairs(r: &mut impl Read) -> Result<(Vec<(f64, f64)>, [u8; 32]), SpectrumIoError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != SPECTRUM_MAGIC {
        return Err(SpectrumIoError::BadMagic);
    }
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != SPECTRUM_VERSION {
        return Err(SpectrumIoError::BadVersion(version));
    }
    r.read_exact(&mut word)?;
    let count = u32::from_le_bytes(word) as usize;
    let mut pairs = Vec::with_capacity(count);
    let mut buf = [0u8; 16];
    for _ in 0..count {
        r.read_exact(&mut buf)
            .map_err(|_| SpectrumIoError::Corrupt("payload truncated"))?;
        pairs.push((
            f64::from_le_bytes(buf[..8].try_into().unwrap()),
            f64::from_le_bytes(buf[8..].try_into().unwrap()),
        ));
    }
    let mut hash = [0u8; 32];
    r.read_exact(&mut hash)
        .map_err(|_| SpectrumIoError::Corrupt("missing config-hash footer"))?;
    let mut extra = [0u8; 1];
    match r.read(&mut extra)? {
        0 => Ok((pairs, hash)),
        _ => Err(SpectrumIoError::Corrupt("trailing bytes")),
    }
}

/// Serialize spectra back-to-back (all must share the grid).
pub fn write_spectra(
    w: &mut impl Write,
    spectra: &[ComplexSpectrum],
    config_hash: &[u8; 32],
) -> Result<(), SpectrumIoError> {
    let pairs: Vec<(f64, f64)> = spectra
        .iter()
        .flat_map(|s| s.values.iter().map(|z| (z.re, z.im)))
        .collect();
    write_pairs(w, &pairs, config_hash)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{quad_polygon, quad_segment, quad_triangle};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn grid() -> FrequencyGrid {
        FrequencyGrid::standard(0.1, 1.0, 10).unwrap()
    }

    fn rand_pt(rng: &mut ChaCha8Rng) -> Point2 {
        pt(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }

    fn rand_triangle(rng: &mut ChaCha8Rng) -> Triangle {
        loop {
            if let Ok(t) = Triangle::new(rand_pt(rng), rand_pt(rng), rand_pt(rng)) {
                if t.area() > 1e-3 {
                    return t;
                }
            }
        }
    }

    #[test]
    fn sinc_values_and_guard() {
        assert_eq!(sinc(0.0), 1.0);
        assert!((sinc(0.5) - 2.0 / PI).abs() < 1e-15);
        assert!(sinc(1.0).abs() < 1e-15);
        // Taylor branch agrees with the direct formula across the switch.
        let a = sinc(0.999_999e-8);
        let b = sinc(1.000_001e-8);
        assert!((a - b).abs() < 1e-15);
        assert!((sinc(1e-9) - 1.0).abs() < 1e-16);
    }

    #[test]
    fn point_spectrum_is_unit_magnitude_pure_phase() {
        let g = grid();
        let origin = cft_point(&pt(0.0, 0.0), &g);
        assert!(origin.values.iter().all(|z| *z == Complex64::new(1.0, 0.0)));

        // e^{−jπ} at (u,v) = (1,0) for the point (0.5, 0).
        let z = cft_point_at(&pt(0.5, 0.0), 1.0, 0.0);
        assert!((z.re + 1.0).abs() < 1e-15 && z.im.abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let p = rand_pt(&mut rng);
            let s = cft_point(&p, &g);
            for z in &s.values {
                assert!((z.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn segment_matches_scaled_line_integral_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let seg = loop {
                if let Ok(s) = Segment::new(rand_pt(&mut rng), rand_pt(&mut rng)) {
                    break s;
                }
            };
            let len = seg.length();
            for (u, v) in [(0.37, -0.61), (1.0, 1.0), (0.1, 0.0)] {
                let analytic = cft_segment_at(&seg, u, v);
                let oracle = quad_segment(&seg, u, v, 64) * len;
                assert!(
                    (analytic - oracle).norm() / (1.0 + oracle.norm()) < 1e-12,
                    "seg {seg:?} at ({u},{v}): {analytic} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn segment_identities() {
        // Canonical segment: pure sinc(u).
        let canon = Segment::new(pt(-0.5, 0.0), pt(0.5, 0.0)).unwrap();
        for u in [0.1, 0.5, 1.0] {
            let z = cft_segment_at(&canon, u, 0.3);
            assert!((z.re - sinc(u)).abs() < 1e-15 && z.im.abs() < 1e-15);
        }
        // Value at the origin is the squared length.
        let seg = Segment::new(pt(0.0, 0.0), pt(0.6, 0.8)).unwrap();
        let z = cft_segment_at(&seg, 0.0, 0.0);
        assert!((z.re - 1.0).abs() < 1e-12 && z.im == 0.0);
    }

    #[test]
    fn canonical_triangle_branches_match_oracle() {
        let tri = Triangle::new(pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 1.0)).unwrap();
        let cases: &[(f64, f64)] = &[
            (0.37, 0.61),   // general position
            (0.0, 0.7),     // u = 0 branch
            (0.8, 0.0),     // v = 0 branch
            (-0.45, 0.45),  // diagonal branch
            (1.0, -0.3),
            (-1.0, 0.4),
            (0.1, 0.1),
        ];
        for &(u, v) in cases {
            let analytic = cft_canonical_triangle(u, v);
            let oracle = quad_triangle(&tri, u, v, 1e-9).unwrap().value;
            assert!(
                (analytic - oracle).norm() / (1.0 + oracle.norm()) < 1e-8,
                "({u},{v}): {analytic} vs {oracle}"
            );
        }
        assert_eq!(cft_canonical_triangle(0.0, 0.0), Complex64::new(0.5, 0.0));
    }

    #[test]
    fn canonical_triangle_continuous_across_branch_switch() {
        // Just inside vs. exactly on each singular line.
        let pairs = [
            ((1e-9, 0.5), (0.0, 0.5)),
            ((0.5, 1e-9), (0.5, 0.0)),
            ((-0.5 + 1e-9, 0.5), (-0.5, 0.5)),
        ];
        for ((u1, v1), (u0, v0)) in pairs {
            let a = cft_canonical_triangle(u1, v1);
            let b = cft_canonical_triangle(u0, v0);
            assert!((a - b).norm() < 1e-6, "({u1},{v1}) vs ({u0},{v0})");
        }
        // And just outside the band, the general formula agrees with the
        // branch value to the band's width.
        let inside = cft_canonical_triangle(0.0, 0.5);
        let outside = cft_canonical_triangle(2e-6, 0.5);
        assert!((inside - outside).norm() < 1e-4);
    }

    #[test]
    fn triangle_identity_on_canonical_and_area_at_origin() {
        let canon = Triangle::new(pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 1.0)).unwrap();
        for (u, v) in [(0.3, 0.7), (1.0, -0.4), (0.1, 0.0)] {
            let a = cft_triangle_at(&canon, u, v);
            let b = cft_canonical_triangle(u, v);
            assert!((a - b).norm() < 1e-15);
        }

        let tri = Triangle::new(pt(0.0, 0.0), pt(2.0, 0.0), pt(0.0, 2.0)).unwrap();
        let z = cft_triangle_at(&tri, 0.0, 0.0);
        assert!((z.re - 2.0).abs() < 1e-12 && z.im.abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let t = rand_triangle(&mut rng);
            let z = cft_triangle_at(&t, 0.0, 0.0);
            assert!((z.re - t.area()).abs() <= 1e-10 * t.area());
        }
    }

    #[test]
    fn triangle_value_ignores_vertex_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let t = rand_triangle(&mut rng);
            let perms = [
                Triangle::new(t.q, t.r, t.s).unwrap(),
                Triangle::new(t.r, t.s, t.q).unwrap(),
                Triangle::new(t.s, t.q, t.r).unwrap(),
                Triangle::new(t.r, t.q, t.s).unwrap(),
            ];
            let (u, v) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let base = cft_triangle_at(&perms[0], u, v);
            for p in &perms[1..] {
                let z = cft_triangle_at(p, u, v);
                assert!(
                    (z - base).norm() < 1e-12 * (1.0 + base.norm()),
                    "vertex relabeling changed the spectrum: {z} vs {base}"
                );
            }
        }
    }

    #[test]
    fn random_triangles_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..10 {
            let t = rand_triangle(&mut rng);
            for (u, v) in [(0.37, 0.61), (1.0, -1.0), (0.1, 0.0), (0.59, 0.17)] {
                let analytic = cft_triangle_at(&t, u, v);
                let oracle = quad_triangle(&t, u, v, 1e-9).unwrap().value;
                assert!(
                    (analytic - oracle).norm() / (1.0 + oracle.norm()) < 1e-7,
                    "{t:?} at ({u},{v}): {analytic} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn translation_multiplies_by_pure_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for _ in 0..20 {
            let t = rand_triangle(&mut rng);
            let (dx, dy) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let shifted = Triangle::new(
                pt(t.q.x + dx, t.q.y + dy),
                pt(t.r.x + dx, t.r.y + dy),
                pt(t.s.x + dx, t.s.y + dy),
            )
            .unwrap();
            let (u, v) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let base = cft_triangle_at(&t, u, v);
            let got = cft_triangle_at(&shifted, u, v);
            let want = base * unit_phase(TAU * (dx * u + dy * v));
            assert!((got - want).norm() < 1e-10 * (1.0 + base.norm()));
            assert!((got.norm() - base.norm()).abs() < 1e-10 * (1.0 + base.norm()));
        }
    }

    #[test]
    fn hermitian_symmetry_for_every_geometry_kind() {
        let g: Vec<Geometry> = vec![
            Geometry::Point(pt(0.3, -0.4)),
            Geometry::Polyline(vec![pt(-1.0, 0.0), pt(0.0, 1.0), pt(1.0, 0.0)]),
            crate::geometry::parse_geometry(
                "POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0), (0.2 0.2, 0.2 0.4, 0.4 0.4, 0.4 0.2, 0.2 0.2))",
                crate::geometry::Format::Wkt,
            )
            .unwrap(),
        ];
        // Deliberately off-grid frequencies.
        let freqs = [(0.123, 0.456), (0.9, -0.7), (0.05, 1.3), (1.7, 0.0)];
        for geom in &g {
            let parts = decompose(geom).unwrap();
            for &(u, v) in &freqs {
                let a = spectrum_value_at(&parts, u, v);
                let b = spectrum_value_at(&parts, -u, -v);
                assert!(
                    (a - b.conj()).norm() < 1e-12 * (1.0 + a.norm()),
                    "{geom:?} at ({u},{v})"
                );
            }
        }
    }

    #[test]
    fn unit_square_matches_separable_closed_form() {
        let Geometry::Polygon(sq) = crate::geometry::parse_geometry(
            "POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))",
            crate::geometry::Format::Wkt,
        )
        .unwrap() else {
            panic!()
        };
        let g = grid();
        let spec = cft_polygon(&sq, &g).unwrap();
        for (&(u, v), z) in g.samples().iter().zip(&spec.values) {
            let phase = -PI * (u + v);
            let mag = sinc(u) * sinc(v);
            let want = Complex64::new(mag * phase.cos(), mag * phase.sin());
            assert!(
                (z - want).norm() <= 1e-9,
                "({u},{v}): got {z}, want {want}"
            );
        }
        // Diagnostic origin value = area.
        let parts = decompose(&Geometry::Polygon(sq)).unwrap();
        let z0 = spectrum_value_at(&parts, 0.0, 0.0);
        assert!((z0.re - 1.0).abs() < 1e-12 && z0.im.abs() < 1e-13);
    }

    #[test]
    fn polygon_spectrum_matches_oracle_with_hole() {
        let Geometry::Polygon(pg) = crate::geometry::parse_geometry(
            "POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0), (1 1, 1 2, 2 2, 2 1, 1 1))",
            crate::geometry::Format::Wkt,
        )
        .unwrap() else {
            panic!()
        };
        let parts = decompose(&Geometry::Polygon(pg.clone())).unwrap();
        for (u, v) in [(0.25, 0.4), (0.1, -0.1)] {
            let analytic = spectrum_value_at(&parts, u, v);
            let oracle = quad_polygon(&pg, u, v, 1e-9).unwrap().value;
            assert!(
                (analytic - oracle).norm() / (1.0 + oracle.norm()) < 1e-7,
                "({u},{v}): {analytic} vs {oracle}"
            );
        }
    }

    #[test]
    fn triangulation_invariance_on_a_pentagon() {
        // Convex pentagon: every fan is a valid partition.
        let p: Vec<Point2> = vec![
            pt(0.0, -1.0),
            pt(0.95, -0.31),
            pt(0.59, 0.81),
            pt(-0.59, 0.81),
            pt(-0.95, -0.31),
        ];
        let fan = |apex: usize| -> Vec<Triangle> {
            (0..p.len())
                .filter_map(|i| {
                    let j = (i + 1) % p.len();
                    if i == apex || j == apex {
                        return None;
                    }
                    Some(Triangle::new(p[apex], p[i], p[j]).unwrap())
                })
                .collect()
        };
        let a = SpectralParts::Triangles(fan(0));
        let b = SpectralParts::Triangles(fan(2));
        let g = grid();
        for &(u, v) in g.samples() {
            let za = spectrum_value_at(&a, u, v);
            let zb = spectrum_value_at(&b, u, v);
            assert!((za - zb).norm() <= 1e-9, "({u},{v}): {za} vs {zb}");
        }
    }

    #[test]
    fn affine_law_spot_check() {
        // For x ↦ Ax + τ: F'(f) = |det A| e^{−j2π τ·f} F(Aᵀ f).
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..10 {
            let t = rand_triangle(&mut rng);
            let (a11, a12, a21, a22, tx, ty) = loop {
                let m: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.5..1.5));
                if (m[0] * m[3] - m[1] * m[2]).abs() > 0.2 {
                    break (
                        m[0],
                        m[1],
                        m[2],
                        m[3],
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                    );
                }
            };
            let det = (a11 * a22 - a12 * a21).abs();
            let map = |p: &Point2| pt(a11 * p.x + a12 * p.y + tx, a21 * p.x + a22 * p.y + ty);
            let Ok(image) = Triangle::new(map(&t.q), map(&t.r), map(&t.s)) else {
                continue;
            };
            for (u, v) in [(0.5, 0.3), (1.0, -0.8)] {
                let lhs = cft_triangle_at(&image, u, v);
                let warped = (a11 * u + a21 * v, a12 * u + a22 * v);
                let rhs = cft_triangle_at(&t, warped.0, warped.1)
                    * unit_phase(TAU * (tx * u + ty * v))
                    * det;
                assert!(
                    (lhs - rhs).norm() < 1e-8 * (1.0 + lhs.norm()),
                    "affine law violated: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn chevron_spectrum_is_real_on_the_u_axis() {
        // Polyline (−1,0) → (0,1) → (1,0): even about the y-axis, so values
        // at (u, 0) are real.
        let g = grid();
        let spec =
            cft_polyline(&[pt(-1.0, 0.0), pt(0.0, 1.0), pt(1.0, 0.0)], &g).unwrap();
        for (&(u, v), z) in g.samples().iter().zip(&spec.values) {
            if v == 0.0 {
                assert!(z.im.abs() < 1e-12, "({u},{v}): im = {}", z.im);
            }
        }
        // And a single-segment polyline is just that segment.
        let one = cft_polyline(&[pt(0.1, 0.2), pt(0.7, -0.3)], &g).unwrap();
        let seg = cft_segment(&Segment::new(pt(0.1, 0.2), pt(0.7, -0.3)).unwrap(), &g);
        assert_eq!(one.values, seg.values);
    }

    #[test]
    fn multipolygon_spectrum_sums_members() {
        let wkt = "MULTIPOLYGON (((0 0, 1 0, 1 1, 0 1, 0 0)), ((2 0, 3 0, 3 1, 2 1, 2 0)))";
        let geom = crate::geometry::parse_geometry(wkt, crate::geometry::Format::Wkt).unwrap();
        let parts = decompose(&geom).unwrap();
        let z0 = spectrum_value_at(&parts, 0.0, 0.0);
        assert!((z0.re - 2.0).abs() < 1e-12);

        let g = grid();
        let whole = encode_spectrum(&geom, &g).unwrap();
        let Geometry::MultiPolygon(pgs) = &geom else { panic!() };
        let a = cft_polygon(&pgs[0], &g).unwrap();
        let b = cft_polygon(&pgs[1], &g).unwrap();
        for i in 0..g.len() {
            assert!((whole.values[i] - (a.values[i] + b.values[i])).norm() < 1e-12);
        }
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let g = grid();
        let spec = cft_point(&pt(0.123, -0.456), &g);
        let hash = [7u8; 32];
        let mut buf = Vec::new();
        write_spectra(&mut buf, &[spec.clone()], &hash).unwrap();
        let (pairs, got_hash) = read_pairs(&mut buf.as_slice()).unwrap();
        assert_eq!(got_hash, hash);
        assert_eq!(pairs.len(), spec.values.len());
        for (p, z) in pairs.iter().zip(&spec.values) {
            assert_eq!(p.0.to_bits(), z.re.to_bits());
            assert_eq!(p.1.to_bits(), z.im.to_bits());
        }

        // Corrupt magic.
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(
            read_pairs(&mut bad.as_slice()),
            Err(SpectrumIoError::BadMagic)
        ));
        // Truncate payload.
        let cut = buf.len() - 40;
        assert!(read_pairs(&mut buf[..cut].to_vec().as_slice()).is_err());
        // Trailing garbage.
        let mut long = buf.clone();
        long.push(0);
        assert!(matches!(
            read_pairs(&mut long.as_slice()),
            Err(SpectrumIoError::Corrupt("trailing bytes"))
        ));
    }

    #[test]
    fn csv_has_provenance_and_rows() {
        let g = FrequencyGrid::build(&[1.0, 2.0]).unwrap();
        let spec = cft_point(&pt(0.0, 0.0), &g);
        let csv = spectrum_to_csv(&spec, &g, "deadbeef");
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# config: deadbeef");
        assert_eq!(lines[1], "index,u,v,re,im");
        assert_eq!(lines.len(), 2 + g.len());
        assert_eq!(lines[2], "0,1,-2,1,0");
    }
}
