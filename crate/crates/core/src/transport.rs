//! How curvature of horizontal curves is carried through a map.
//!
//! For a unit-speed horizontal curve α with curvature κ, the image T∘α has
//! curvature κ̃ = √(κ² + ‖(∇T_*)(α̇, α̇)‖²). Circles map to constant-curvature
//! curves for every circle exactly when T is isotropic; helices map to
//! helices when T is umbilical and its mean curvature satisfies
//! (∇^{T⊥})²H₂ = −τ²H₂. The checks here measure both sides of those
//! statements numerically.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::isotropy::{isotropy_of, umbilicity_of, IsotropyReport};
use crate::manifold::{frenet_apparatus_any_speed, generate_frenet_curve, Frame, FrenetCurve, FrenetOptions};
use crate::rmap::{jet, MapCurveContext, SmoothMap};
use crate::{par, sampling, Error};

pub use crate::manifold::BOUNDARY_SKIP;

/// Horizontality drift above which the theorem checks are not evaluated.
pub const DRIFT_GATE: f64 = 1e-4;

// Trial streams are kept apart from the isotropy sample streams.
const TRIAL_STREAM_BASE: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub isometry: f64,
    pub isotropy: f64,
    pub spread: f64,
    pub condition: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            isometry: 1e-8,
            isotropy: 1e-6,
            spread: 1e-4,
            condition: 1e-3,
        }
    }
}

/// Curve length and sampling for generated curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSampling {
    pub s_max: f64,
    pub step: f64,
}

impl Default for CurveSampling {
    fn default() -> Self {
        CurveSampling {
            s_max: 2.0 * std::f64::consts::PI,
            step: 1e-3,
        }
    }
}

/// max − min over `values` without the first and last `skip` entries.
pub fn interior_spread(values: &[f64], skip: usize) -> f64 {
    let inner = interior(values, skip);
    let lo = inner.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = inner.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if inner.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

fn interior<T>(values: &[T], skip: usize) -> &[T] {
    if values.len() <= 2 * skip {
        &values[0..0]
    } else {
        &values[skip..values.len() - skip]
    }
}

fn interior_mean(values: &[f64]) -> f64 {
    let inner = interior(values, BOUNDARY_SKIP);
    inner.iter().sum::<f64>() / inner.len().max(1) as f64
}

/// Image of a source curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageCurve {
    pub positions: Vec<DVector<f64>>,
    /// T_*V₁.
    pub tangents: Vec<DVector<f64>>,
    /// ‖kernel part of V₁‖ per sample.
    pub drift: Vec<f64>,
    pub horizontality_drift: f64,
}

pub fn pushforward_curve(t: &SmoothMap, curve: &FrenetCurve) -> Result<ImageCurve, Error> {
    let ctx = MapCurveContext::from_frenet(t, curve)?;
    Ok(image_of(&ctx, &curve.v1))
}

fn image_of(ctx: &MapCurveContext, v1: &[DVector<f64>]) -> ImageCurve {
    let drift = ctx.vertical_drift(v1);
    ImageCurve {
        positions: ctx.image_positions(),
        tangents: ctx.image_velocity.clone(),
        horizontality_drift: drift.iter().copied().fold(0.0, f64::max),
        drift,
    }
}

/// κ̃ two ways: directly as ‖∇^T_ξ T_*ξ‖, and from the source data as
/// √(κ² + ‖(∇T_*)(ξ,ξ)‖²).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageCurvature {
    pub direct: Vec<f64>,
    pub predicted: Vec<f64>,
    pub eq31_residual: f64,
}

pub fn image_curvature(ctx: &MapCurveContext, kappa: f64) -> Result<ImageCurvature, Error> {
    let accel = ctx.pullback_derivative(&ctx.image_velocity)?;
    let n = ctx.len();
    let direct: Vec<f64> = (0..n).map(|i| ctx.jets[i].norm2(&accel[i])).collect();
    let predicted: Vec<f64> = (0..n)
        .map(|i| {
            let xi = &ctx.curve.velocity[i];
            let s = ctx.jets[i].norm2(&ctx.jets[i].sff(xi, xi));
            (kappa * kappa + s * s).sqrt()
        })
        .collect();
    let eq31_residual = direct
        .iter()
        .zip(&predicted)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(ImageCurvature {
        direct,
        predicted,
        eq31_residual,
    })
}

/// sup over interior samples of ‖(∇^T)³T_*ξ + K̃²∇^T T_*ξ‖.
pub fn eq41_residual(ctx: &MapCurveContext, k_tilde_sq: f64) -> Result<f64, Error> {
    let d1 = ctx.pullback_derivative(&ctx.image_velocity)?;
    let d2 = ctx.pullback_derivative(&d1)?;
    let d3 = ctx.pullback_derivative(&d2)?;
    let idx: Vec<usize> = (0..ctx.len()).collect();
    Ok(interior(&idx, BOUNDARY_SKIP)
        .iter()
        .map(|&i| ctx.jets[i].norm2(&(&d3[i] + &d1[i] * k_tilde_sq)))
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Circle,
    Helix,
}

/// Everything measured along one generated curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportReport {
    pub kind: CurveKind,
    pub source_kappa: f64,
    pub source_tau: f64,
    pub sample_count: usize,
    pub horizontality_drift: f64,
    pub max_isometry_residual: f64,
    pub image_kappa_samples: Vec<f64>,
    pub image_tau_samples: Vec<Option<f64>>,
    pub drift_samples: Vec<f64>,
    pub kappa_spread: f64,
    pub tau_spread: Option<f64>,
    pub eq31_residual: f64,
    /// Only for helices.
    pub umbilic_residual: Option<f64>,
    pub helix_condition_residual: Option<f64>,
    /// `None` when the image torsion is not constant (the check does not
    /// apply).
    pub eq41_residual: Option<f64>,
    pub condition_holds: Option<bool>,
    pub image_is_helix: Option<bool>,
    pub biconditional_upheld: Option<bool>,
    pub warnings: Vec<String>,
}

/// Measure transport along `curve`; circles (τ = 0) skip the helix
/// condition.
pub fn check_curve(t: &SmoothMap, curve: &FrenetCurve, tol: &Tolerances) -> Result<TransportReport, Error> {
    let ctx = MapCurveContext::from_frenet(t, curve)?;
    check_curve_in(t, curve, &ctx, tol)
}

pub fn check_curve_in(
    t: &SmoothMap,
    curve: &FrenetCurve,
    ctx: &MapCurveContext,
    tol: &Tolerances,
) -> Result<TransportReport, Error> {
    let mut warnings = Vec::new();
    let image = image_of(ctx, &curve.v1);
    if image.horizontality_drift > DRIFT_GATE {
        warnings.push(format!(
            "horizontality drift {:e} exceeds {DRIFT_GATE:e}; theorem checks not evaluated",
            image.horizontality_drift
        ));
    }
    let max_isometry_residual = ctx.jets.iter().map(|j| j.isometry_residual()).fold(0.0, f64::max);
    if max_isometry_residual > tol.isometry {
        warnings.push(format!(
            "map is not Riemannian along the curve (isometry residual {max_isometry_residual:e})"
        ));
    }
    let kc = image_curvature(ctx, curve.kappa)?;
    let app = frenet_apparatus_any_speed(t.target(), &image.positions, curve.step, Some(&image.tangents))?;
    let kappa_spread = interior_spread(&app.kappa, BOUNDARY_SKIP);
    let taus = interior(&app.tau, BOUNDARY_SKIP);
    let tau_values: Option<Vec<f64>> = taus.iter().copied().collect();
    let tau_spread = tau_values
        .as_ref()
        .map(|v| interior_spread(v, 0))
        .filter(|_| !taus.is_empty());

    let eq41 = match tau_spread {
        Some(ts) if ts <= tol.spread => {
            let mean_tau = tau_values
                .as_deref()
                .map(|v| v.iter().sum::<f64>() / v.len() as f64)
                .unwrap_or(0.0);
            let mean_kappa = interior_mean(&app.kappa);
            Some(eq41_residual(ctx, mean_kappa * mean_kappa + mean_tau * mean_tau)?)
        }
        _ => None,
    };

    let gated = image.horizontality_drift <= DRIFT_GATE;
    let (kind, umbilic, helix_res, condition_holds, image_is_helix, upheld) = if curve.tau == 0.0 {
        (CurveKind::Circle, None, None, None, None, None)
    } else {
        let umb = par::try_map_indexed(ctx.len(), |i| umbilicity_of(&ctx.jets[i]))?;
        let umbilic_residual = umb.iter().map(|u| u.residual).fold(0.0, f64::max);
        let h2 = ctx.mean_curvature_field();
        let d1 = ctx.normal_connection(&h2)?;
        let d2 = ctx.normal_connection(&d1)?;
        let tau2 = curve.tau * curve.tau;
        let idx: Vec<usize> = (0..ctx.len()).collect();
        let helix_condition_residual = interior(&idx, BOUNDARY_SKIP)
            .iter()
            .map(|&i| ctx.jets[i].norm2(&(&d2[i] + &h2[i] * tau2)))
            .fold(0.0, f64::max);
        let holds = umbilic_residual <= tol.condition && helix_condition_residual <= tol.condition;
        let helix = kappa_spread <= tol.spread
            && tau_spread.is_some_and(|s| s <= tol.spread)
            && eq41.is_some_and(|r| r <= tol.condition);
        (
            CurveKind::Helix,
            Some(umbilic_residual),
            Some(helix_condition_residual),
            Some(holds),
            Some(helix),
            gated.then_some(holds == helix),
        )
    };

    Ok(TransportReport {
        kind,
        source_kappa: curve.kappa,
        source_tau: curve.tau,
        sample_count: curve.len(),
        horizontality_drift: image.horizontality_drift,
        max_isometry_residual,
        image_kappa_samples: app.kappa,
        image_tau_samples: app.tau,
        drift_samples: image.drift,
        kappa_spread,
        tau_spread,
        eq31_residual: kc.eq31_residual,
        umbilic_residual: umbilic,
        helix_condition_residual: helix_res,
        eq41_residual: eq41,
        condition_holds,
        image_is_helix,
        biconditional_upheld: upheld,
        warnings,
    })
}

/// Helix transport check; τ = 0 curves are rejected in favour of
/// [`theorem31_check`].
pub fn helix_condition_check(t: &SmoothMap, curve: &FrenetCurve, tol: &Tolerances) -> Result<TransportReport, Error> {
    if curve.tau == 0.0 {
        return Err(Error::InvalidParameter {
            name: "tau",
            reason: "zero torsion is a circle; use the circle check".into(),
        });
    }
    check_curve(t, curve, tol)
}

/// Outcome of one random circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Trial {
    Completed {
        kappa_spread: f64,
        eq31_residual: f64,
        horizontality_drift: f64,
    },
    Skipped {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem31Report {
    pub point: Vec<f64>,
    pub kappa: f64,
    pub trials: Vec<Trial>,
    pub completed: usize,
    pub skipped: usize,
    pub max_spread: Option<f64>,
    pub max_eq31_residual: Option<f64>,
    pub max_drift: Option<f64>,
    pub isotropy: IsotropyReport,
    pub isometry_residual: f64,
    /// (max spread ≤ tol) ⟺ isotropic; `None` when no trial completed, the
    /// drift gate failed or the map is not Riemannian at the point.
    pub biconditional_upheld: Option<bool>,
}

/// Integrate `trials` seeded horizontal circles of curvature `kappa` from
/// `p` and compare the constancy of their image curvature with the isotropy
/// verdict at `p`.
#[allow(clippy::too_many_arguments)]
pub fn theorem31_check(
    t: &SmoothMap,
    p: &[f64],
    kappa: f64,
    trials: usize,
    samples: usize,
    seed: u64,
    sampling_opts: CurveSampling,
    tol: &Tolerances,
) -> Result<Theorem31Report, Error> {
    let jt = jet(t, p)?;
    if jt.rank < 2 {
        return Err(Error::RankTooSmall {
            rank: jt.rank,
            needed: 2,
        });
    }
    let isotropy = isotropy_of(&jt, samples, seed, tol.isotropy)?;
    let isometry_residual = jt.isometry_residual();
    let outcomes = par::try_map_indexed(trials, |k| {
        let mut rng = sampling::stream(seed, TRIAL_STREAM_BASE + k as u64);
        let frame = jt.random_orthonormal_frame(&mut rng, 2)?;
        let frame = Frame {
            v1: frame[0].clone(),
            v2: frame[1].clone(),
            v3: None,
        };
        let opts = FrenetOptions {
            kappa,
            tau: 0.0,
            s_max: sampling_opts.s_max,
            step: sampling_opts.step,
        };
        let curve = match generate_frenet_curve(t.source(), p, &frame, opts) {
            Ok(c) => c,
            Err(e @ Error::LeftChart { .. }) => return Ok(Trial::Skipped { reason: e.to_string() }),
            Err(e) => return Err(e),
        };
        let ctx = match MapCurveContext::from_frenet(t, &curve) {
            Ok(c) => c,
            Err(e @ (Error::OutsideDomain { .. } | Error::Degenerate { .. })) => {
                return Ok(Trial::Skipped { reason: e.to_string() })
            }
            Err(e) => return Err(e),
        };
        let kc = image_curvature(&ctx, kappa)?;
        let drift = ctx.vertical_drift(&curve.v1).into_iter().fold(0.0, f64::max);
        Ok(Trial::Completed {
            kappa_spread: interior_spread(&kc.direct, BOUNDARY_SKIP),
            eq31_residual: kc.eq31_residual,
            horizontality_drift: drift,
        })
    })?;
    let done: Vec<(f64, f64, f64)> = outcomes
        .iter()
        .filter_map(|o| match o {
            Trial::Completed {
                kappa_spread,
                eq31_residual,
                horizontality_drift,
            } => Some((*kappa_spread, *eq31_residual, *horizontality_drift)),
            Trial::Skipped { .. } => None,
        })
        .collect();
    let max_of = |f: fn(&(f64, f64, f64)) -> f64| (!done.is_empty()).then(|| done.iter().map(f).fold(0.0, f64::max));
    let max_spread = max_of(|d| d.0);
    let max_eq31_residual = max_of(|d| d.1);
    let max_drift = max_of(|d| d.2);
    let biconditional_upheld = match (max_spread, max_drift) {
        _ if isometry_residual > tol.isometry => None,
        (Some(s), Some(d)) if d <= DRIFT_GATE => Some((s <= tol.spread) == isotropy.is_isotropic()),
        _ => None,
    };
    Ok(Theorem31Report {
        point: p.to_vec(),
        kappa,
        completed: done.len(),
        skipped: trials - done.len(),
        trials: outcomes,
        max_spread,
        max_eq31_residual,
        max_drift,
        isotropy,
        isometry_residual,
        biconditional_upheld,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn e(n: usize, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        v
    }

    #[test]
    fn spread_ignores_boundary() {
        let mut v = vec![1.0; 30];
        v[0] = 9.0;
        v[29] = -9.0;
        assert_eq!(interior_spread(&v, BOUNDARY_SKIP), 0.0);
        v[10] = 1.5;
        assert_eq!(interior_spread(&v, BOUNDARY_SKIP), 0.5);
    }

    #[test]
    fn sphere_small_circle_image_curvature() {
        let t = SmoothMap::sphere_immersion(1.0);
        let frame = Frame {
            v1: e(2, 0),
            v2: e(2, 1),
            v3: None,
        };
        let opts = FrenetOptions {
            kappa: 1.0,
            tau: 0.0,
            s_max: 2.0 * PI,
            step: 1e-3,
        };
        let c = generate_frenet_curve(t.source(), &[PI / 2.0, 0.0], &frame, opts).unwrap();
        let r = check_curve(&t, &c, &Tolerances::default()).unwrap();
        let interior = &r.image_kappa_samples[5..r.sample_count - 5];
        assert!(interior.iter().all(|k| (k - 2f64.sqrt()).abs() < 1e-4));
        assert!(r.kappa_spread <= 1e-4 && r.eq31_residual <= 1e-4);
        assert!(r.horizontality_drift == 0.0);
    }

    #[test]
    fn identity_circles_have_constant_image() {
        let t = SmoothMap::identity(2);
        let r = theorem31_check(
            &t,
            &[0.0, 0.0],
            2.0,
            4,
            20,
            1,
            CurveSampling::default(),
            &Tolerances::default(),
        )
        .unwrap();
        assert_eq!(r.completed, 4);
        assert!(r.max_spread.unwrap() <= 1e-6);
        assert_eq!(r.biconditional_upheld, Some(true));
    }

    #[test]
    fn identity_helix_both_sides_true() {
        let t = SmoothMap::identity(3);
        let frame = Frame {
            v1: e(3, 0),
            v2: e(3, 1),
            v3: Some(e(3, 2)),
        };
        let opts = FrenetOptions {
            kappa: 1.0,
            tau: 1.0,
            s_max: 2.0 * PI,
            step: 1e-3,
        };
        let c = generate_frenet_curve(t.source(), &[0.0; 3], &frame, opts).unwrap();
        let r = helix_condition_check(&t, &c, &Tolerances::default()).unwrap();
        assert_eq!(r.condition_holds, Some(true));
        assert_eq!(
            r.image_is_helix,
            Some(true),
            "{:?}",
            (r.kappa_spread, r.tau_spread, r.eq41_residual)
        );
        assert!(r.eq41_residual.unwrap() <= 1e-3);
    }
}
