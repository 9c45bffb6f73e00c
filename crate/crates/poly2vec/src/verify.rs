//! Self-check suite: analytic transforms against the quadrature oracle,
//! the algebraic property suites, and finite-difference gradient checks.
//!
//! Every check reports its worst observed error next to its tolerance, so a
//! tightened tolerance turns into an honest failure rather than a silent
//! pass. The mutation mode corrupts the segment kernel on purpose and
//! expects the oracle comparison to catch it.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cft::{
    cft_point_at, cft_segment_at, cft_segment_at_with, cft_triangle_at, decompose,
    encode_spectrum, sinc, spectrum_value_at,
};
use crate::config::RunConfig;
use crate::geometry::{polygon_area, translate, Geometry, Point2, Polygon};
use crate::grid::FrequencyGrid;
use crate::nn::{distance_mse, softmax_cross_entropy, FusionVariant};
use crate::quadrature::{quad_polygon, quad_segment, quad_triangle};
use crate::tasks::{PairType, Task};
use crate::train::{build_model, Model};
use crate::triangulate::{Segment, Triangle};

/// Per-check tolerances; `scaled` tightens or loosens all of them at once.
#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub triangle_oracle: f64,
    pub segment_oracle: f64,
    pub polygon_oracle: f64,
    pub square_closed_form: f64,
    pub identities: f64,
    pub hermitian: f64,
    pub translation: f64,
    pub triangulation: f64,
    pub affine: f64,
    pub linearity: f64,
    pub gradients: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            triangle_oracle: 1e-6,
            segment_oracle: 1e-9,
            polygon_oracle: 1e-6,
            square_closed_form: 1e-9,
            identities: 1e-10,
            hermitian: 1e-12,
            translation: 1e-10,
            triangulation: 1e-9,
            affine: 1e-8,
            linearity: 1e-12,
            gradients: 1e-4,
        }
    }
}

impl Tolerances {
    pub fn scaled(scale: f64) -> Self {
        let base = Tolerances::default();
        Tolerances {
            triangle_oracle: base.triangle_oracle * scale,
            segment_oracle: base.segment_oracle * scale,
            polygon_oracle: base.polygon_oracle * scale,
            square_closed_form: base.square_closed_form * scale,
            identities: base.identities * scale,
            hermitian: base.hermitian * scale,
            translation: base.translation * scale,
            triangulation: base.triangulation * scale,
            affine: base.affine * scale,
            linearity: base.linearity * scale,
            gradients: base.gradients * scale,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Worst error observed, in whatever metric the check documents.
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckOutcome {
    fn from_worst(name: &'static str, worst: f64, tol: f64, detail: String) -> Self {
        CheckOutcome { name, passed: worst <= tol, worst, tolerance: tol, detail }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub config_hash: String,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render_text(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(
                s,
                "[{}] {:<26} worst {:.3e}  tol {:.1e}  {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.worst,
                c.tolerance,
                c.detail
            );
        }
        let _ = writeln!(
            s,
            "verify: {}",
            if self.all_passed() { "all checks passed" } else { "FAILURES PRESENT" }
        );
        s
    }
}

/// Run the full suite. In mutation mode only the negative control runs: the
/// segment kernel is corrupted and the oracle comparison must fail.
pub fn run_verify(cfg: &RunConfig, tol: &Tolerances, mutation: bool) -> VerifyReport {
    let grid = cfg.grid().expect("validated config");
    let mut checks = Vec::new();
    if mutation {
        checks.push(mutation_negative_control(cfg.seed, &grid, tol));
    } else {
        checks.push(triangle_oracle(cfg.seed, &grid, tol));
        checks.push(segment_oracle(cfg.seed, &grid, tol));
        checks.push(polygon_oracle(cfg.seed, &grid, tol));
        checks.push(square_closed_form(&grid, tol));
        checks.push(exact_identities(cfg.seed, tol));
        checks.push(hermitian_symmetry(cfg.seed, tol));
        checks.push(translation_law(cfg.seed, &grid, tol));
        checks.push(triangulation_invariance(&grid, tol));
        checks.push(affine_law(cfg.seed, tol));
        checks.push(linearity(cfg.seed, &grid, tol));
        checks.push(gradient_checks(cfg, tol));
    }
    VerifyReport { config_hash: cfg.hash_hex(), checks }
}

fn rand_pt(rng: &mut ChaCha8Rng) -> Point2 {
    Point2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
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

fn rand_segment(rng: &mut ChaCha8Rng) -> Segment {
    loop {
        if let Ok(s) = Segment::new(rand_pt(rng), rand_pt(rng)) {
            if s.length() > 1e-2 {
                return s;
            }
        }
    }
}

/// Closed star ring around the origin: near-even angular spacing (so the
/// origin-centered kernel disc has radius at least cos(max gap / 2) * r0)
/// with jittered radii in [r0, r1]. CCW; callers reverse for holes.
fn star_ring(rng: &mut ChaCha8Rng, r0: f64, r1: f64) -> Vec<Point2> {
    let nv = rng.gen_range(5..=9usize);
    let base = std::f64::consts::TAU / nv as f64;
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let mut pts: Vec<Point2> = (0..nv)
        .map(|i| {
            let ang = phase + i as f64 * base + rng.gen_range(-0.25..0.25) * base;
            let r = rng.gen_range(r0..r1);
            Point2::new(r * ang.cos(), r * ang.sin())
        })
        .collect();
    pts.push(pts[0]);
    pts
}

/// Star polygon for the property checks, optionally with a hole around the
/// center (the spacing bound in [`star_ring`] keeps the hole interior).
fn rand_polygon(rng: &mut ChaCha8Rng, with_hole: bool) -> Polygon {
    let exterior = star_ring(rng, 0.5, 0.8);
    let holes = if with_hole {
        let mut h = star_ring(rng, 0.08, 0.16);
        h.reverse();
        vec![h]
    } else {
        vec![]
    };
    Polygon { exterior, holes }
}

/// |a − b| / (1 + |b|): relative for large oracles, absolute near zero,
/// which keeps sinc zeros from blowing up the quotient.
fn semi_rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / (1.0 + b.norm())
}

fn triangle_oracle(seed: u64, grid: &FrequencyGrid, tol: &Tolerances) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x71);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let t = rand_triangle(&mut rng);
        for &(u, v) in grid.samples() {
            let analytic = cft_triangle_at(&t, u, v);
            let oracle = quad_triangle(&t, u, v, 1e-9).expect("oracle converges").value;
            worst = worst.max(semi_rel(analytic, oracle));
        }
    }
    CheckOutcome::from_worst(
        "triangle-oracle",
        worst,
        tol.triangle_oracle,
        "100 random triangles x full grid vs adaptive quadrature".into(),
    )
}

fn segment_worst(seed: u64, grid: &FrequencyGrid, sinc_fn: impl Fn(f64) -> f64 + Copy) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5e);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let s = rand_segment(&mut rng);
        let len = s.length();
        for &(u, v) in grid.samples() {
            let analytic = cft_segment_at_with(&s, u, v, sinc_fn);
            let oracle = quad_segment(&s, u, v, 64) * len;
            worst = worst.max(semi_rel(analytic, oracle));
        }
    }
    worst
}

fn segment_oracle(seed: u64, grid: &FrequencyGrid, tol: &Tolerances) -> CheckOutcome {
    CheckOutcome::from_worst(
        "segment-oracle",
        segment_worst(seed, grid, sinc),
        tol.segment_oracle,
        "100 random segments x full grid vs length x line-integral oracle".into(),
    )
}

/// Negative control: a corrupted sinc kernel must blow past the tolerance.
fn mutation_negative_control(seed: u64, grid: &FrequencyGrid, tol: &Tolerances) -> CheckOutcome {
    let corrupted = |t: f64| sinc(t) + 1e-3;
    let worst = segment_worst(seed, grid, corrupted);
    CheckOutcome {
        name: "mutation-negative-control",
        passed: worst > tol.segment_oracle,
        worst,
        tolerance: tol.segment_oracle,
        detail: "corrupted segment kernel must FAIL the oracle comparison".into(),
    }
}

fn polygon_oracle(seed: u64, grid: &FrequencyGrid, tol: &Tolerances) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x90);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let pg = rand_polygon(&mut rng, i % 4 == 0);
        let g = Geometry::Polygon(pg.clone());
        let spec = encode_spectrum(&g, grid).expect("valid polygon");
        // Every 7th sample: the polygon oracle re-integrates each triangle,
        // and the triangle check already covers the full grid.
        for (k, &(u, v)) in grid.samples().iter().enumerate().step_by(7) {
            let oracle = quad_polygon(&pg, u, v, 1e-9).expect("oracle converges").value;
            worst = worst.max(semi_rel(spec.values[k], oracle));
        }
    }
    CheckOutcome::from_worst(
        "polygon-oracle",
        worst,
        tol.polygon_oracle,
        "20 random polygons (some holed), grid subsample vs quadrature".into(),
    )
}

fn square_closed_form(grid: &FrequencyGrid, tol: &Tolerances) -> CheckOutcome {
    let unit = Geometry::Polygon(Polygon {
        exterior: vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
            Point2::new(0.0, 0.0),
        ],
        holes: vec![],
    });
    let spec = encode_spectrum(&unit, grid).expect("unit square");
    let mut worst = 0.0f64;
    for (k, &(u, v)) in grid.samples().iter().enumerate() {
        let phase = -std::f64::consts::PI * (u + v);
        let expect = Complex64::new(phase.cos(), phase.sin()) * sinc(u) * sinc(v);
        worst = worst.max((spec.values[k] - expect).norm());
    }
    CheckOutcome::from_worst(
        "square-closed-form",
        worst,
        tol.square_closed_form,
        "unit square vs separable product form at every grid sample".into(),
    )
}

fn exact_identities(seed: u64, tol: &Tolerances) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1d);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        // Point spectra have unit magnitude everywhere.
        let p = rand_pt(&mut rng);
        let (u, v) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        worst = worst.max((cft_point_at(&p, u, v).norm() - 1.0).abs());
        // Segment at the origin equals squared length.
        let s = rand_segment(&mut rng);
        let l2 = s.length() * s.length();
        worst = worst.max((cft_segment_at(&s, 0.0, 0.0).re - l2).abs() / l2);
        // Triangle and polygon at the origin equal their area.
        let t = rand_triangle(&mut rng);
        worst = worst.max((cft_triangle_at(&t, 0.0, 0.0).re - t.area()).abs() / t.area());
        let pg = rand_polygon(&mut rng, true);
        let area = polygon_area(&pg);
        let parts = decompose(&Geometry::Polygon(pg)).expect("valid");
        let val = spectrum_value_at(&parts, 0.0, 0.0);
        worst = worst.max((val.re - area).abs() / area);
    }
    CheckOutcome::from_worst(
        "exact-identities",
        worst,
        tol.identities,
        "unit point magnitude; value at zero = squared length / area".into(),
    )
}

fn hermitian_symmetry(seed: u64, tol: &Tolerances) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x4e);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let geoms = [
            Geometry::Point(rand_pt(&mut rng)),
            Geometry::Polyline(vec![rand_pt(&mut rng), rand_pt(&mut rng), rand_pt(&mut rng)]),
            Geometry::Polygon(rand_polygon(&mut rng, true)),
        ];
        for g in &geoms {
            let parts = decompose(g).expect("valid");
            let (u, v) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let f = spectrum_value_at(&parts, u, v);
            let f_neg = spectrum_value_at(&parts, -u, -v);
            worst = worst.max((f_neg - f.conj()).norm());
        }
    }
    CheckOutcome::from_worst(
        "hermitian-symmetry",
        worst,
        tol.hermitian,
        "value at negated frequencies equals the conjugate".into(),
    )
}

fn translation_law(seed: u64, grid: &FrequencyGrid, tol: &Tolerances) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7a);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let g = Geometry::Polygon(rand_polygon(&mut rng, false));
        let (dx, dy) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let shifted = translate(&g, dx, dy);
        let spec = encode_spectrum(&g, grid).expect("valid");
        let spec_shifted = encode_spectrum(&shifted, grid).expect("valid");
        for (k, &(u, v)) in grid.samples().iter().enumerate() {
            // Magnitude invariance.
            worst = worst.max((spec_shifted.values[k].norm() - spec.values[k].norm()).abs());
            // Exact phase factor.
            let ph = -std::f64::consts::TAU * (dx * u + dy * v);
            let factor = Complex64::new(ph.cos(), ph.sin());
            worst = worst.max(semi_rel(spec_shifted.values[k], spec.values[k] * factor));
        }
    }
    CheckOutcome::from_worst(
        "translation-law",
        worst,
        tol.translation,
        "translation multiplies the spectrum by a pure phase".into(),
    )
}

fn triangulation_invariance(grid: &FrequencyGrid, tol: &Tolerances) -> CheckOutcome {
    // Convex pentagon: compare the library triangulation against a manual
    // fan from vertex 0 — same region, different triangle sets.
    let vs = [
        Point2::new(0.9, 0.0),
        Point2::new(0.3, 0.85),
        Point2::new(-0.7, 0.55),
        Point2::new(-0.72, -0.5),
        Point2::new(0.25, -0.9),
    ];
    let mut ring = vs.to_vec();
    ring.push(vs[0]);
    let pg = Geometry::Polygon(Polygon { exterior: ring, holes: vec![] });
    let spec = encode_spectrum(&pg, grid).expect("valid pentagon");
    let fan: Vec<Triangle> = (1..vs.len() - 1)
        .map(|i| Triangle::new(vs[0], vs[i], vs[i + 1]).expect("convex fan"))
        .collect();
    let mut worst = 0.0f64;
    for (k, &(u, v)) in grid.samples().iter().enumerate() {
        let total: Complex64 = fan.iter().map(|t| cft_triangle_at(t, u, v)).sum();
        worst = worst.max(semi_rel(spec.values[k], total));
    }
    CheckOutcome::from_worst(
        "triangulation-invariance",
        worst,
        tol.triangulation,
        "pentagon spectrum identical under two triangulations".into(),
    )
}

fn affine_law(seed: u64, tol: &Tolerances) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xaf);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let t = rand_triangle(&mut rng);
        // Random comfortably-invertible A and shift tau.
        let (a11, a12, a21, a22, tx, ty) = loop {
            let m: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.5..1.5)).collect();
            if (m[0] * m[3] - m[1] * m[2]).abs() > 0.1 {
                break (m[0], m[1], m[2], m[3], m[4], m[5]);
            }
        };
        let map = |p: &Point2| Point2::new(a11 * p.x + a12 * p.y + tx, a21 * p.x + a22 * p.y + ty);
        let Ok(mapped) = Triangle::new(map(&t.q), map(&t.r), map(&t.s)) else {
            continue;
        };
        let det = (a11 * a22 - a12 * a21).abs();
        let (u, v) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let lhs = cft_triangle_at(&mapped, u, v);
        // Mapping by x -> Ax + tau scales by |det A|, shifts phase by tau,
        // and evaluates the original at the transposed frequencies.
        let (au, av) = (a11 * u + a21 * v, a12 * u + a22 * v);
        let ph = -std::f64::consts::TAU * (tx * u + ty * v);
        let rhs = Complex64::new(ph.cos(), ph.sin()) * cft_triangle_at(&t, au, av) * det;
        worst = worst.max(semi_rel(lhs, rhs));
    }
    CheckOutcome::from_worst(
        "affine-law",
        worst,
        tol.affine,
        "triangle spectrum transforms by det, phase, and transposed frequencies".into(),
    )
}

fn linearity(seed: u64, grid: &FrequencyGrid, tol: &Tolerances) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x11);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let a = rand_polygon(&mut rng, false);
        let b = {
            let mut pg = rand_polygon(&mut rng, false);
            // Slide well away so the pair forms a valid multipolygon.
            for p in pg.exterior.iter_mut() {
                p.x += 5.0;
            }
            pg
        };
        let multi = Geometry::MultiPolygon(vec![a.clone(), b.clone()]);
        let sa = encode_spectrum(&Geometry::Polygon(a), grid).expect("valid");
        let sb = encode_spectrum(&Geometry::Polygon(b), grid).expect("valid");
        let sm = encode_spectrum(&multi, grid).expect("valid");
        for k in 0..grid.len() {
            worst = worst.max((sm.values[k] - (sa.values[k] + sb.values[k])).norm());
        }
    }
    CheckOutcome::from_worst(
        "linearity",
        worst,
        tol.linearity,
        "multipolygon spectrum is the sum of member spectra".into(),
    )
}

/// Central-difference gradient checks per trainable block: the two path
/// MLPs, the final fusion MLP, the classification head (through the
/// cross-entropy loss), and the whole net through the distance loss.
fn gradient_checks(cfg: &RunConfig, tol: &Tolerances) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9d);
    let w_total = 10;
    let n = 6;
    let mut worst = 0.0f64;
    let mut detail = String::new();

    let rand_feats = |rng: &mut ChaCha8Rng| {
        (
            Array2::from_shape_fn((n, w_total), |_| rng.gen_range(0.0..1.5)),
            Array2::from_shape_fn((n, w_total), |_| rng.gen_range(-3.0..3.0)),
        )
    };

    // Classification loss exercises h_z, h_phi, h_final, and the head.
    {
        let small = RunConfig {
            w_axis: 2,
            d: 8,
            final_hidden: 12,
            head_hidden: 12,
            task: Task::Topology,
            pair_type: PairType::PolygonPolygon,
            ..cfg.clone()
        };
        let mut model = build_model(&small, w_total, FusionVariant::Learned);
        model.params.init_fan_in_uniform(&mut rng, 1.0);
        let (z_a, phi_a) = rand_feats(&mut rng);
        let (z_b, phi_b) = rand_feats(&mut rng);
        let labels: Vec<usize> = (0..n).map(|i| i % model.n_classes).collect();
        let d = model.d;
        let loss_of = |model: &Model| -> (f64, Vec<f64>) {
            let (va, ta) = model.fusion.forward(&model.params, &z_a, &phi_a);
            let (vb, tb) = model.fusion.forward(&model.params, &z_b, &phi_b);
            let mut cat = Array2::zeros((n, 2 * d));
            for r in 0..n {
                for c in 0..d {
                    cat[(r, c)] = va[(r, c)];
                    cat[(r, d + c)] = vb[(r, c)];
                }
            }
            let head = model.head.as_ref().expect("classification head");
            let (logits, th) = head.forward(&model.params, &cat);
            let (loss, dlogits) = softmax_cross_entropy(&logits, &labels);
            let mut grads = vec![0.0; model.params.len()];
            let dcat = head.backward(&model.params, &th, &dlogits, &mut grads);
            let mut dva = Array2::zeros((n, d));
            let mut dvb = Array2::zeros((n, d));
            for r in 0..n {
                for c in 0..d {
                    dva[(r, c)] = dcat[(r, c)];
                    dvb[(r, c)] = dcat[(r, d + c)];
                }
            }
            model.fusion.backward(&model.params, &ta, &dva, &mut grads);
            model.fusion.backward(&model.params, &tb, &dvb, &mut grads);
            (loss, grads)
        };
        let (_, analytic) = loss_of(&model);
        for prefix in ["h_z.", "h_phi.", "h_final.", "head."] {
            let w = block_worst(&mut model, prefix, &analytic, 10, &mut rng, |m| loss_of(m).0);
            use std::fmt::Write as _;
            let _ = write!(detail, "{prefix}{w:.1e} ");
            worst = worst.max(w);
        }
    }

    // Distance loss exercises the norm subgradient through the fusion net.
    {
        let small = RunConfig {
            w_axis: 2,
            d: 8,
            final_hidden: 12,
            head_hidden: 12,
            task: Task::Distance,
            pair_type: PairType::PointPoint,
            ..cfg.clone()
        };
        let mut model = build_model(&small, w_total, FusionVariant::Learned);
        model.params.init_fan_in_uniform(&mut rng, 1.0);
        let (z_a, phi_a) = rand_feats(&mut rng);
        let (z_b, phi_b) = rand_feats(&mut rng);
        let target: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
        let loss_of = |model: &Model| -> (f64, Vec<f64>) {
            let (va, ta) = model.fusion.forward(&model.params, &z_a, &phi_a);
            let (vb, tb) = model.fusion.forward(&model.params, &z_b, &phi_b);
            let (loss, dva, dvb) = distance_mse(&va, &vb, &target);
            let mut grads = vec![0.0; model.params.len()];
            model.fusion.backward(&model.params, &ta, &dva, &mut grads);
            model.fusion.backward(&model.params, &tb, &dvb, &mut grads);
            (loss, grads)
        };
        let (_, analytic) = loss_of(&model);
        let w = block_worst(&mut model, "", &analytic, 10, &mut rng, |m| loss_of(m).0);
        use std::fmt::Write as _;
        let _ = write!(detail, "distance:{w:.1e}");
        worst = worst.max(w);
    }

    CheckOutcome::from_worst("gradient-checks", worst, tol.gradients, detail)
}

/// Probe random parameters inside the tensors whose names start with
/// `prefix` ("" = all) against central finite differences.
fn block_worst(
    model: &mut Model,
    prefix: &str,
    analytic: &[f64],
    probes: usize,
    rng: &mut ChaCha8Rng,
    mut loss: impl FnMut(&Model) -> f64,
) -> f64 {
    let ranges: Vec<(usize, usize)> = model
        .params
        .specs()
        .iter()
        .filter(|s| s.name.starts_with(prefix))
        .map(|s| (s.offset, s.offset + s.rows * s.cols))
        .collect();
    assert!(!ranges.is_empty(), "no tensors under '{prefix}'");
    let step = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let (lo, hi) = ranges[rng.gen_range(0..ranges.len())];
        let i = rng.gen_range(lo..hi);
        let orig = model.params.data[i];
        model.params.data[i] = orig + step;
        let lp = loss(model);
        model.params.data[i] = orig - step;
        let lm = loss(model);
        model.params.data[i] = orig;
        let numeric = (lp - lm) / (2.0 * step);
        let denom = numeric.abs().max(analytic[i].abs()).max(1e-8);
        worst = worst.max((numeric - analytic[i]).abs() / denom);
    }
    worst
}
