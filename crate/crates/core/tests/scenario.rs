use std::path::PathBuf;

use riemap_core::isotropy::IsotropyVerdict;
use riemap_core::scenario::{
    builtin, builtin_names, exit_code, load_scenario, load_scenario_or_builtin, parse_scenario, run, run_full,
    sample_table, Overrides, RunReport, ScenarioError, Verdict,
};

const GOLDEN: &[(&str, Verdict, bool)] = &[
    ("sphere_isotropy", Verdict::Pass, false),
    ("sphere_great_circle", Verdict::Pass, false),
    ("sphere_radius2", Verdict::Pass, false),
    ("sphere_radius_half", Verdict::Pass, false),
    ("scaling_negative", Verdict::Fail, false),
    ("paper_example", Verdict::Fail, true),
    ("quadric", Verdict::Pass, false),
    ("projection", Verdict::Pass, false),
    ("identity_helix", Verdict::Pass, false),
    ("s3_helix", Verdict::Pass, false),
];

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("riemap-scenario-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn golden_verdicts() {
    assert_eq!(builtin_names().count(), GOLDEN.len());
    for &(name, verdict, informational) in GOLDEN {
        let r = run(&builtin(name).unwrap());
        assert_eq!(r.verdict, verdict, "{name}: {:?}", r.failures);
        assert_eq!(r.informational, informational, "{name}");
        assert_eq!(r.verdict == Verdict::Fail, !r.failures.is_empty(), "{name}");
        let code = if verdict == Verdict::Pass || informational {
            0
        } else {
            1
        };
        assert_eq!(exit_code(&r), code, "{name}");
        let json = r.to_json();
        assert_eq!(RunReport::from_json(&json).unwrap().to_json(), json, "{name}");
    }
}

#[test]
fn sphere_isotropy_details() {
    let s = builtin("sphere_isotropy").unwrap();
    assert_eq!(s.source.name(), "sphere{1}");
    assert_eq!(s.target.name(), "euclidean{3}");
    let r = run(&s);
    for p in &r.points {
        assert!(p.riemannian.unwrap().riemannian);
        assert_eq!(p.isotropy.as_ref().unwrap().verdict, IsotropyVerdict::IsotropicAtTol);
        assert!(p.umbilicity.as_ref().unwrap().residual <= 1e-8);
    }
    let curve = r.curve.unwrap();
    assert!(curve.transport.unwrap().kappa_spread <= 1e-4);
    assert_eq!(curve.theorem31.unwrap().biconditional_upheld, Some(true));
}

#[test]
fn scaling_records_isometry_residual() {
    let r = run(&builtin("scaling_negative").unwrap());
    for p in &r.points {
        let check = p.riemannian.unwrap();
        assert!((check.isometry_residual - 3.0).abs() < 1e-12);
        assert!(!check.riemannian);
    }
}

#[test]
fn example_scenario_is_reported_without_gating() {
    let r = run(&builtin("paper_example").unwrap());
    assert!(r.informational);
    assert_eq!(exit_code(&r), 0);
    assert!(r.points.iter().all(|p| p.isotropy.is_some() && p.riemannian.is_some()));
    assert_eq!(r.points[0].riemannian.unwrap().isometry_residual, 3.0);
}

#[test]
fn reports_are_deterministic() {
    for name in ["scaling_negative", "projection", "identity_helix"] {
        let s = builtin(name).unwrap();
        assert_eq!(run(&s).to_json(), run(&s).to_json(), "{name}");
    }
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let s = builtin("sphere_isotropy").unwrap();
    let with = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let out = run_full(&s, false);
                let table = sample_table(
                    &out.curve.unwrap(),
                    out.report.curve.as_ref().unwrap().transport.as_ref().unwrap(),
                );
                (out.report.to_json(), table)
            })
    };
    assert_eq!(with(1), with(4));
}

#[test]
fn wall_time_only_on_request() {
    let s = builtin("projection").unwrap();
    assert!(run_full(&s, false).report.wall_time_seconds.is_none());
    assert!(!run(&s).to_json().contains("wall_time"));
    assert!(run_full(&s, true).report.wall_time_seconds.is_some());
}

#[test]
fn seed_override_changes_seeded_output_only() {
    let s = builtin("scaling_negative").unwrap();
    let reseeded = s
        .clone()
        .with_overrides(&Overrides {
            seed: Some(99),
            ..Default::default()
        })
        .unwrap();
    assert_eq!(reseeded.spec.seed, 99);
    let (a, b) = (run(&s), run(&reseeded));
    assert_eq!(a.verdict, b.verdict);
    assert_ne!(a.to_json(), b.to_json());
}

#[test]
fn files_load_like_builtins() {
    for name in builtin_names() {
        let src = riemap_core::scenario::builtin_source(name).unwrap();
        let path = scratch(&format!("{name}.scn"), src);
        let from_file = load_scenario(&path).unwrap();
        assert_eq!(from_file.spec, builtin(name).unwrap().spec);
        assert_eq!(
            load_scenario_or_builtin(path.to_str().unwrap()).unwrap().spec,
            from_file.spec
        );
    }
    assert!(load_scenario_or_builtin("sphere_isotropy").is_ok());
    assert!(matches!(
        load_scenario_or_builtin("no_such_thing"),
        Err(ScenarioError::Io { .. })
    ));
}

#[test]
fn load_errors_name_fields_and_lines() {
    let base = builtin_source_text("sphere_isotropy");
    let bad_step = base.replace("step = 1e-3", "step = 0");
    let path = scratch("bad_step.scn", &bad_step);
    let e = load_scenario(&path).unwrap_err();
    assert_eq!(e.field(), Some("curve.step"));
    let line = bad_step.lines().position(|l| l == "step = 0").unwrap() + 1;
    assert_eq!(e.line(), Some(line));

    let bad_dim = base.replace("point = 1.0, 2.0", "point = 1.0, 2.0, 3.0");
    let e = parse_scenario(&bad_dim).unwrap_err();
    assert!(
        matches!(
            e,
            ScenarioError::DimensionMismatch {
                expected: 2,
                found: 3,
                ..
            }
        ),
        "{e:?}"
    );

    let e = parse_scenario("name = x\n[source\n").unwrap_err();
    assert!(matches!(e, ScenarioError::Syntax { line: 2, .. }), "{e:?}");

    assert!(matches!(builtin("nope"), Err(ScenarioError::UnknownBuiltin(_))));
}

fn builtin_source_text(name: &str) -> String {
    riemap_core::scenario::builtin_source(name).unwrap().to_string()
}
