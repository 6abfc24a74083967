//! Acceptance run: one line per criterion.
//!
//! Run with `cargo test -p riemap-core --test acceptance`. The process exits
//! non-zero if any criterion fails, except for clauses listed as
//! unattainable (they are still evaluated and printed).

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::DVector;
use rand::Rng as _;
use riemap_core::exprlang::parse;
use riemap_core::isotropy::{composition_residual, lambda_of};
use riemap_core::manifold::{
    frenet_apparatus, generate_frenet_curve, helix_residual, ChartManifold, Frame, FrenetCurve, FrenetOptions,
};
use riemap_core::numcore::{fd, hessian_tensor, jacobian};
use riemap_core::rmap::{jet, MapCurveContext, SmoothMap};
use riemap_core::scenario::{builtin, builtin_names, run_full, sample_table};
use riemap_core::transport::{check_curve, theorem31_check, CurveSampling, Tolerances, BOUNDARY_SKIP};

use common::{builtin_maps, e, quadric, random_point, random_vector, rng};

// Same allocator as the command-line tool.
#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

struct Outcome {
    pass: bool,
    detail: String,
    /// Clauses that fail for a reason recorded as unattainable; printed but
    /// excluded from the exit status.
    unattainable: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
            unattainable: Vec::new(),
        }
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("differentiation oracle", c1_differentiation),
        ("sphere second fundamental form", c2_sphere_lambda),
        ("image curvature of a small circle", c3_small_circle),
        ("circle transport biconditional", c4_circle_transport),
        ("covariant derivative identity along circles", c5_lemma),
        ("composition of second fundamental forms", c6_composition),
        ("helix transport controls", c7_helix_controls),
        ("Frenet round trip", c8_round_trip),
        ("determinism", c9_determinism),
    ];
    let total = Instant::now();
    let mut failed = 0;
    for (i, (title, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = f();
        let status = if out.pass && out.unattainable.is_empty() {
            "PASS"
        } else {
            "FAIL"
        };
        println!(
            "criterion {} {status}: {title}; {} [{:.1}s]",
            i + 1,
            out.detail,
            t.elapsed().as_secs_f64()
        );
        for u in &out.unattainable {
            println!("    unattainable clause: {u}");
        }
        if !out.pass {
            failed += 1;
        }
    }
    println!("acceptance finished in {:.1}s", total.elapsed().as_secs_f64());
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn c1_differentiation() -> Outcome {
    let mut worst_j: f64 = 0.0;
    let mut worst_h: f64 = 0.0;
    for (mi, map) in builtin_maps().iter().enumerate() {
        for k in 0..100 {
            let mut r = rng(1000 + mi as u64, k);
            let p = random_point(map.source(), &mut r);
            let ja = jacobian(map, &p).unwrap();
            let jf = fd::jacobian(map, &p, 1e-5).unwrap();
            worst_j = worst_j.max(fd::max_relative_error(ja.as_slice(), jf.as_slice()));
            let ha = hessian_tensor(map, &p).unwrap();
            let hf = fd::hessian_tensor(map, &p, 1e-4).unwrap();
            worst_h = worst_h.max(fd::max_relative_error(ha.as_slice(), hf.as_slice()));
        }
    }
    Outcome::new(
        worst_j <= 1e-6 && worst_h <= 1e-6,
        format!("max relative error jacobian {worst_j:.2e}, hessian {worst_h:.2e} (tol 1e-6)"),
    )
}

fn c2_sphere_lambda() -> Outcome {
    let mut worst: f64 = 0.0;
    for (ri, r) in [1.0, 2.0, 0.5].into_iter().enumerate() {
        let map = SmoothMap::sphere_immersion(r);
        for k in 0..100 {
            let mut g = rng(2000 + ri as u64, k);
            let p = random_point(map.source(), &mut g);
            let jt = jet(&map, &p).unwrap();
            let x = jt.random_unit_horizontal(&mut g);
            worst = worst.max((lambda_of(&jt, &x).unwrap() - 1.0 / r).abs());
        }
    }
    Outcome::new(worst <= 1e-6, format!("max |lambda - 1/r| {worst:.2e} (tol 1e-6)"))
}

fn south_east_circle(r: f64, kappa: f64, s_max: f64) -> FrenetCurve {
    let frame = Frame {
        v1: e(2, 0) / r,
        v2: e(2, 1) / r,
        v3: None,
    };
    let opts = FrenetOptions {
        kappa,
        tau: 0.0,
        s_max,
        step: 1e-3,
    };
    generate_frenet_curve(&ChartManifold::sphere(r), &[PI / 2.0, 0.0], &frame, opts).unwrap()
}

fn equator(r: f64, s_max: f64) -> FrenetCurve {
    let frame = Frame {
        v1: e(2, 1) / r,
        v2: -e(2, 0) / r,
        v3: None,
    };
    let opts = FrenetOptions {
        kappa: 0.0,
        tau: 0.0,
        s_max,
        step: 1e-3,
    };
    generate_frenet_curve(&ChartManifold::sphere(r), &[PI / 2.0, 0.0], &frame, opts).unwrap()
}

fn c3_small_circle() -> Outcome {
    let map = SmoothMap::sphere_immersion(1.0);
    let curve = south_east_circle(1.0, 1.0, 2.0 * PI);
    let rep = check_curve(&map, &curve, &Tolerances::default()).unwrap();
    let n = rep.image_kappa_samples.len();
    let off = rep.image_kappa_samples[BOUNDARY_SKIP..n - BOUNDARY_SKIP]
        .iter()
        .map(|k| (k - 2f64.sqrt()).abs())
        .fold(0.0, f64::max);
    Outcome::new(
        rep.kappa_spread <= 1e-4 && rep.eq31_residual <= 1e-4 && off <= 1e-4,
        format!(
            "spread {:.2e}, eq31 residual {:.2e}, max |kappa~ - sqrt 2| {off:.2e} (tol 1e-4)",
            rep.kappa_spread, rep.eq31_residual
        ),
    )
}

fn c4_circle_transport() -> Outcome {
    let sampling = CurveSampling::default();
    let tol = Tolerances::default();
    let cases: Vec<(SmoothMap, Vec<f64>, f64, bool)> = vec![
        (SmoothMap::identity(2), vec![0.0, 0.0], 2.0, true),
        (SmoothMap::identity(3), vec![0.0, 0.0, 0.0], 2.0, true),
        (SmoothMap::sphere_immersion(1.0), vec![PI / 2.0, 0.0], 2.0, true),
        (SmoothMap::sphere_immersion(2.0), vec![PI / 2.0, 0.0], 1.0, true),
        (SmoothMap::sphere_immersion(0.5), vec![PI / 2.0, 0.0], 4.0, true),
        (SmoothMap::projection(3, 2).unwrap(), vec![0.0, 0.0, 0.0], 1.0, true),
        (quadric(), vec![0.0, 0.0], 1.0, false),
    ];
    let mut ok = true;
    let mut counterexamples = 0;
    let mut iso_worst: f64 = 0.0;
    let mut quadric_spread = 0.0;
    for (i, (map, p, kappa, isotropic)) in cases.iter().enumerate() {
        let r = theorem31_check(map, p, *kappa, 10, 100, 40 + i as u64, sampling, &tol).unwrap();
        if r.biconditional_upheld != Some(true) {
            counterexamples += 1;
        }
        let spread = r.max_spread.unwrap_or(f64::INFINITY);
        if *isotropic {
            iso_worst = iso_worst.max(spread);
            ok &= spread <= 1e-4 && r.isotropy.is_isotropic() && r.completed == 10;
        } else {
            quadric_spread = spread;
            ok &= spread > 1e-2 && !r.isotropy.is_isotropic();
        }
    }
    Outcome::new(
        ok && counterexamples == 0,
        format!(
            "isotropic maps max spread {iso_worst:.2e} (tol 1e-4), quadric spread {quadric_spread:.3} (> 1e-2), \
             {counterexamples} counterexamples"
        ),
    )
}

fn c5_lemma() -> Outcome {
    let mut worst: f64 = 0.0;
    for r in [1.0, 2.0] {
        let map = SmoothMap::sphere_immersion(r);
        for curve in [equator(r, 2.0), south_east_circle(r, 1.0, 2.0)] {
            let ctx = MapCurveContext::from_frenet(&map, &curve).unwrap();
            let h = ctx.mean_curvature_field();
            for (x2, x3) in [(&curve.v1, &curve.v1), (&curve.v1, &curve.v2), (&curve.v2, &curve.v2)] {
                worst = worst.max(ctx.lemma21(x2, x3, &h).unwrap().residual);
            }
        }
    }
    Outcome::new(worst <= 1e-4, format!("max residual {worst:.2e} (tol 1e-4)"))
}

fn c6_composition() -> Outcome {
    let (phi, psi) = SmoothMap::paper_example_factors();
    let p = |s: &str, n| parse(s, n).unwrap();
    let submersion = SmoothMap::projection(3, 2).unwrap();
    let immersion = SmoothMap::custom(
        ChartManifold::euclidean(2),
        ChartManifold::euclidean(3),
        vec![p("sin(x1)*cos(x2)", 2), p("sin(x1)*sin(x2)", 2), p("cos(x1)", 2)],
    )
    .unwrap();
    let mut worst: f64 = 0.0;
    for (pi, (f, g)) in [(&phi, &psi), (&submersion, &immersion)].into_iter().enumerate() {
        for k in 0..50 {
            let mut r = rng(6000 + pi as u64, k);
            let x0 = random_point(f.source(), &mut r);
            let n = f.source().dim();
            let (x, y) = (random_vector(n, &mut r), random_vector(n, &mut r));
            worst = worst.max(composition_residual(f, g, &x0, &x, &y).unwrap());
        }
    }
    Outcome::new(
        worst <= 1e-6,
        format!("max residual {worst:.2e} at 100 points (tol 1e-6)"),
    )
}

fn helix(m: &ChartManifold, p: &[f64], kappa: f64, tau: f64, s_max: f64) -> FrenetCurve {
    let n = m.dim();
    let g = m.metric_at(p).unwrap();
    let unit = |i: usize| e(n, i) / g[(i, i)].sqrt();
    let frame = Frame {
        v1: unit(0),
        v2: unit(1),
        v3: Some(unit(2)),
    };
    let opts = FrenetOptions {
        kappa,
        tau,
        s_max,
        step: 1e-3,
    };
    generate_frenet_curve(m, p, &frame, opts).unwrap()
}

fn c7_helix_controls() -> Outcome {
    let tol = Tolerances::default();
    // The round 2-sphere has no room for torsion; the unit 3-sphere is the
    // smallest round sphere carrying a helix with tau != 0.
    let s3 = SmoothMap::hypersphere_immersion(1.0, 3);
    let neg = check_curve(
        &s3,
        &helix(s3.source(), &[PI / 2.0, PI / 2.0, 0.0], 1.0, 0.5, 2.0 * PI),
        &tol,
    )
    .unwrap();
    let id = SmoothMap::identity(3);
    let pos = check_curve(&id, &helix(id.source(), &[0.0; 3], 1.0, 1.0, 2.0 * PI), &tol).unwrap();

    let helix_res = neg.helix_condition_residual.unwrap();
    let neg_residual_ok = (helix_res - 0.25).abs() <= 1e-3 && neg.condition_holds == Some(false);
    let tau_spread = neg.tau_spread.unwrap_or(f64::NAN);
    let neg_tau_clause = tau_spread > 1e-2;
    let pos_ok = pos.condition_holds == Some(true)
        && pos.image_is_helix == Some(true)
        && pos.helix_condition_residual.unwrap() <= 1e-3
        && pos.eq41_residual.is_some_and(|r| r <= 1e-3);
    let upheld = neg.biconditional_upheld == Some(true) && pos.biconditional_upheld == Some(true);
    let mut out = Outcome::new(
        neg_residual_ok && pos_ok && upheld,
        format!(
            "negative: helix residual {helix_res:.6} (0.25 +- 1e-3), image tau spread {tau_spread:.2e}, \
             eq41 {:.3e}, image helix {:?}; positive: residual {:.1e}, eq41 {:.2e}, both sides true {}",
            neg.eq41_residual.unwrap_or(f64::NAN),
            neg.image_is_helix,
            pos.helix_condition_residual.unwrap(),
            pos.eq41_residual.unwrap_or(f64::NAN),
            pos_ok
        ),
    );
    if !neg_tau_clause {
        out.unattainable.push(format!(
            "image tau spread > 1e-2: measured {tau_spread:.2e}; the image of a helix of the 3-sphere has constant \
             curvature and torsion in R^4 and fails only through its third curvature (eq41 residual)"
        ));
    }
    out
}

fn c8_round_trip() -> Outcome {
    let mut worst_k: f64 = 0.0;
    let mut worst_t: f64 = 0.0;
    let mut worst_helix: f64 = 0.0;
    let euclid = ChartManifold::euclidean(3);
    let sphere = ChartManifold::sphere(1.0);
    let s3 = ChartManifold::hypersphere(1.0, 3);
    for k in 0..50 {
        let mut r = rng(8000, k);
        let kappa = r.random_range(0.5..2.0);
        let tau = r.random_range(0.2..1.5) * if r.random_bool(0.5) { 1.0 } else { -1.0 };

        // euclidean{3}: random right-handed frame, full turn
        let a = random_vector(3, &mut r).normalize();
        let c = random_vector(3, &mut r);
        let b = (&c - &a * a.dot(&c)).normalize();
        let frame = Frame {
            v3: Some(a.cross(&b)),
            v1: a,
            v2: b,
        };
        let opts = FrenetOptions {
            kappa,
            tau,
            s_max: 2.0 * PI,
            step: 1e-3,
        };
        let c = generate_frenet_curve(&euclid, &[0.0; 3], &frame, opts).unwrap();
        let (dk, dt) = recovery(&euclid, &c);
        worst_k = worst_k.max(dk);
        worst_t = worst_t.max(dt);
        worst_helix = worst_helix.max(helix_residual(&euclid, &c).unwrap());

        // sphere{1}: circles only, short enough to stay in the chart
        let angle = r.random_range(0.0..2.0 * PI);
        let frame = Frame {
            v1: DVector::from_vec(vec![angle.cos(), angle.sin()]),
            v2: DVector::from_vec(vec![-angle.sin(), angle.cos()]),
            v3: None,
        };
        let opts = FrenetOptions {
            kappa,
            tau: 0.0,
            s_max: 1.0,
            step: 1e-3,
        };
        let c = generate_frenet_curve(&sphere, &[PI / 2.0, 0.0], &frame, opts).unwrap();
        let (dk, dt) = recovery(&sphere, &c);
        worst_k = worst_k.max(dk);
        worst_t = worst_t.max(dt);

        // the unit 3-sphere carries genuine helices
        let c = helix(&s3, &[PI / 2.0, PI / 2.0, 0.0], kappa, tau, 1.0);
        let (dk, dt) = recovery(&s3, &c);
        worst_k = worst_k.max(dk);
        worst_t = worst_t.max(dt);
        worst_helix = worst_helix.max(helix_residual(&s3, &c).unwrap());
    }
    Outcome::new(
        worst_k <= 1e-4 && worst_t <= 1e-4 && worst_helix <= 1e-3,
        format!(
            "max relative error kappa {worst_k:.2e}, tau {worst_t:.2e} (tol 1e-4); helix residual {worst_helix:.2e} \
             (tol 1e-3)"
        ),
    )
}

/// Worst interior relative error of the recovered (κ, τ).
fn recovery(m: &ChartManifold, c: &FrenetCurve) -> (f64, f64) {
    let app = frenet_apparatus(m, &c.u, c.step, None).unwrap();
    let n = c.len();
    let mut dk: f64 = 0.0;
    let mut dt: f64 = 0.0;
    for i in BOUNDARY_SKIP..n - BOUNDARY_SKIP {
        dk = dk.max((app.kappa[i] - c.kappa).abs() / c.kappa);
        match app.tau[i] {
            Some(t) if c.tau == 0.0 => dt = dt.max(t.abs()),
            Some(t) => dt = dt.max((t - c.tau).abs() / c.tau.abs()),
            None => dt = f64::INFINITY,
        }
    }
    (dk, dt)
}

fn c9_determinism() -> Outcome {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let mut differing = Vec::new();
    let mut count = 0;
    for name in builtin_names() {
        let s = builtin(name).unwrap();
        let render = |pool: &rayon::ThreadPool| {
            pool.install(|| {
                let out = run_full(&s, false);
                let table = match (&out.curve, out.report.curve.as_ref().and_then(|c| c.transport.as_ref())) {
                    (Some(c), Some(t)) => sample_table(c, t),
                    _ => String::new(),
                };
                (out.report.to_json(), table)
            })
        };
        let a = render(&one);
        let b = render(&four);
        count += 1;
        if a != b {
            differing.push(name);
        }
    }
    Outcome::new(
        differing.is_empty(),
        format!(
            "{count} built-in scenarios run twice (1 and 4 threads), {} differ {differing:?}",
            differing.len()
        ),
    )
}
