use std::fmt::Write as _;
use std::time::Instant;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{FrameSpec, Scenario, ScenarioSpec};
use crate::isotropy::{isotropy_of, umbilicity_of, IsotropyReport, UmbilicityReport};
use crate::manifold::{generate_frenet_curve, Frame, FrenetCurve, FrenetOptions};
use crate::rmap::{jet, RiemannianCheck};
use crate::transport::{check_curve, theorem31_check, CurveSampling, Theorem31Report, TransportReport, DRIFT_GATE};
use crate::{par, sampling, Error};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub index: usize,
    pub point: Vec<f64>,
    pub image: Vec<f64>,
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub riemannian: Option<RiemannianCheck>,
    pub isotropy: Option<IsotropyReport>,
    pub umbilicity: Option<UmbilicityReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveReport {
    pub start: Vec<f64>,
    /// The frame actually used, seeded frames included.
    pub frame: Option<FrameSpec>,
    pub sample_count: usize,
    /// Largest orthonormality defect of the integrated frame.
    pub frame_drift: Option<f64>,
    pub transport: Option<TransportReport>,
    pub theorem31: Option<Theorem31Report>,
    pub notes: Vec<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool_version: String,
    pub scenario: ScenarioSpec,
    pub points: Vec<PointReport>,
    pub curve: Option<CurveReport>,
    pub verdict: Verdict,
    pub informational: bool,
    pub failures: Vec<String>,
    /// Only recorded on request; it would break byte-for-byte comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

impl RunReport {
    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports contain only finite numbers");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<RunReport, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// A report together with the generated curve (for sample tables).
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub curve: Option<FrenetCurve>,
}

/// 0 for a pass or an informational scenario, 1 for a failure.
pub fn exit_code(report: &RunReport) -> i32 {
    if report.informational || report.verdict == Verdict::Pass {
        0
    } else {
        1
    }
}

pub fn run(s: &Scenario) -> RunReport {
    run_full(s, false).report
}

pub fn run_full(s: &Scenario, timing: bool) -> RunOutcome {
    let started = Instant::now();
    let spec = &s.spec;
    let tol = spec.tolerances;

    let points = par::map_indexed(spec.points.len(), |i| point_report(s, i));
    let mut failures = Vec::new();
    for p in &points {
        if let Some(e) = &p.error {
            failures.push(format!("point {}: {e}", p.index));
        }
        if let Some(r) = &p.riemannian {
            if !r.riemannian {
                failures.push(format!(
                    "point {}: not a Riemannian map (isometry residual {:e})",
                    p.index, r.isometry_residual
                ));
            }
        }
        if let (Some(u), Some(iso)) = (&p.umbilicity, &p.isotropy) {
            if u.residual <= tol.condition && !iso.is_isotropic() {
                failures.push(format!(
                    "point {}: umbilical (residual {:e}) but not isotropic",
                    p.index, u.residual
                ));
            }
        }
    }

    let (curve_report, curve) = match &spec.curve {
        None => (None, None),
        Some(_) => {
            let (report, curve) = curve_report(s);
            failures.extend(curve_failures(&report, s));
            (Some(report), curve)
        }
    };

    let verdict = if failures.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    RunOutcome {
        report: RunReport {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            scenario: spec.clone(),
            points,
            curve: curve_report,
            verdict,
            informational: spec.informational,
            failures,
            wall_time_seconds: timing.then(|| started.elapsed().as_secs_f64()),
        },
        curve,
    }
}

fn point_report(s: &Scenario, index: usize) -> PointReport {
    let p = &s.spec.points[index];
    let mut out = PointReport {
        index,
        point: p.clone(),
        image: Vec::new(),
        rank: 0,
        singular_values: Vec::new(),
        riemannian: None,
        isotropy: None,
        umbilicity: None,
        error: None,
    };
    let tol = s.spec.tolerances;
    let jt = match jet(&s.map, p) {
        Ok(j) => j,
        Err(e) => {
            out.error = Some(e.to_string());
            return out;
        }
    };
    out.image = jt.q.iter().copied().collect();
    out.rank = jt.rank;
    out.singular_values = jt.singular_values.clone();
    let residual = jt.isometry_residual();
    out.riemannian = Some(RiemannianCheck {
        isometry_residual: residual,
        riemannian: residual <= tol.isometry,
    });
    match isotropy_of(&jt, s.spec.samples, s.spec.seed, tol.isotropy) {
        Ok(r) => out.isotropy = Some(r),
        Err(e) => out.error = Some(e.to_string()),
    }
    if jt.rank >= 2 {
        match umbilicity_of(&jt) {
            Ok(r) => out.umbilicity = Some(r),
            Err(e) => out.error = Some(e.to_string()),
        }
    }
    out
}

fn initial_frame(s: &Scenario, p: &[f64]) -> Result<Frame, Error> {
    let c = s.spec.curve.as_ref().expect("curve present");
    let v = |x: &[f64]| DVector::from_column_slice(x);
    match &c.frame {
        FrameSpec::Explicit { v1, v2, v3 } => Ok(Frame {
            v1: v(v1),
            v2: v(v2),
            v3: v3.as_deref().map(v),
        }),
        FrameSpec::Seeded { seed } => {
            let jt = jet(&s.map, p)?;
            let k = if c.tau != 0.0 { 3 } else { 2 };
            let mut vs = jt
                .random_orthonormal_frame(&mut sampling::stream(*seed, 0), k)?
                .into_iter();
            Ok(Frame {
                v1: vs.next().expect("k >= 2"),
                v2: vs.next().expect("k >= 2"),
                v3: vs.next(),
            })
        }
    }
}

fn curve_report(s: &Scenario) -> (CurveReport, Option<FrenetCurve>) {
    let c = s.spec.curve.as_ref().expect("curve present");
    let p = s.spec.points[0].clone();
    let mut report = CurveReport {
        start: p.clone(),
        frame: None,
        sample_count: 0,
        frame_drift: None,
        transport: None,
        theorem31: None,
        notes: Vec::new(),
        error: None,
    };
    let main = (|| -> Result<FrenetCurve, Error> {
        let frame = initial_frame(s, &p)?;
        report.frame = Some(FrameSpec::Explicit {
            v1: frame.v1.iter().copied().collect(),
            v2: frame.v2.iter().copied().collect(),
            v3: frame.v3.as_ref().map(|v| v.iter().copied().collect()),
        });
        let opts = FrenetOptions {
            kappa: c.kappa,
            tau: c.tau,
            s_max: c.s_max,
            step: c.step,
        };
        let curve = generate_frenet_curve(&s.source, &p, &frame, opts)?;
        report.sample_count = curve.len();
        report.frame_drift = Some(curve.frame_drift(&s.source)?);
        report.transport = Some(check_curve(&s.map, &curve, &s.spec.tolerances)?);
        Ok(curve)
    })();
    let curve = match main {
        Ok(curve) => Some(curve),
        Err(e) => {
            report.error = Some(e.to_string());
            None
        }
    };
    let rank = jet(&s.map, &p).map(|j| j.rank).unwrap_or(0);
    if rank < 2 {
        report
            .notes
            .push(format!("circle trials skipped: rank {rank} at the first point"));
    } else {
        let sampling_opts = CurveSampling {
            s_max: c.s_max,
            step: c.step,
        };
        match theorem31_check(
            &s.map,
            &p,
            c.trial_kappa,
            c.trials,
            s.spec.samples,
            s.spec.seed,
            sampling_opts,
            &s.spec.tolerances,
        ) {
            Ok(r) => report.theorem31 = Some(r),
            Err(e) => report.error = Some(report.error.take().unwrap_or_else(|| e.to_string())),
        }
    }
    (report, curve)
}

fn curve_failures(r: &CurveReport, s: &Scenario) -> Vec<String> {
    let tol = s.spec.tolerances;
    let mut out = Vec::new();
    if let Some(e) = &r.error {
        out.push(format!("curve: {e}"));
    }
    if let Some(t) = &r.transport {
        if t.horizontality_drift > DRIFT_GATE {
            out.push(format!("curve: horizontality drift {:e}", t.horizontality_drift));
        }
        if t.max_isometry_residual <= tol.isometry && t.eq31_residual > tol.spread {
            out.push(format!(
                "curve: the two image curvature computations differ by {:e}",
                t.eq31_residual
            ));
        }
        if t.biconditional_upheld == Some(false) {
            out.push(format!(
                "curve: helix condition holds = {:?} but image is helix = {:?}",
                t.condition_holds, t.image_is_helix
            ));
        }
    }
    if let Some(t) = &r.theorem31 {
        match t.biconditional_upheld {
            Some(true) => {}
            Some(false) => out.push(format!(
                "circle trials: max image curvature spread {:e} disagrees with isotropy verdict {:?}",
                t.max_spread.unwrap_or(f64::NAN),
                t.isotropy.verdict
            )),
            None if t.isometry_residual > tol.isometry => {}
            None if t.completed == 0 => out.push("circle trials: every trial left the chart".into()),
            None => out.push(format!(
                "circle trials: horizontality drift {:e} too large to judge",
                t.max_drift.unwrap_or(f64::NAN)
            )),
        }
    }
    out
}

fn num(out: &mut String, v: f64) {
    if v.is_finite() {
        let _ = write!(out, "{v:.16e}");
    } else {
        out.push_str("nan");
    }
}

/// CSV of the generated curve: `s, u1..um, kappa_tilde, tau_tilde,
/// horiz_drift`, 17 significant digits, `nan` where a value is undefined.
pub fn sample_table(curve: &FrenetCurve, transport: &TransportReport) -> String {
    let m = curve.u.first().map_or(0, |u| u.len());
    let mut out = String::from("s");
    for k in 1..=m {
        let _ = write!(out, ",u{k}");
    }
    out.push_str(",kappa_tilde,tau_tilde,horiz_drift\n");
    for i in 0..curve.len() {
        num(&mut out, curve.s[i]);
        for x in curve.u[i].iter() {
            out.push(',');
            num(&mut out, *x);
        }
        out.push(',');
        num(&mut out, transport.image_kappa_samples[i]);
        out.push(',');
        num(&mut out, transport.image_tau_samples[i].unwrap_or(f64::NAN));
        out.push(',');
        num(&mut out, transport.drift_samples[i]);
        out.push('\n');
    }
    out
}
