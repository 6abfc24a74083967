//! Curves of constant curvature and torsion, and Frenet data of sampled
//! curves.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::covariant::{check_grid, CurveContext};
use super::ChartManifold;
use crate::numcore::linalg::{inner, norm, orthonormality_defect};
use crate::numcore::stencil;
use crate::numcore::{rk4_integrate_checked, OdeState};
use crate::Error;

/// Below this curvature a sample is treated as geodesic and τ is undefined.
pub const KAPPA_FLOOR: f64 = 1e-8;

const MAX_STEP: f64 = 1e-2;
const FRAME_TOL: f64 = 1e-10;
const UNIT_SPEED_TOL: f64 = 1e-4;
const MIN_APPARATUS_SAMPLES: usize = 9;

/// Initial Frenet frame. `v3` may be omitted for circles.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub v1: DVector<f64>,
    pub v2: DVector<f64>,
    pub v3: Option<DVector<f64>>,
}

impl Frame {
    pub fn vectors(&self) -> Vec<DVector<f64>> {
        let mut out = vec![self.v1.clone(), self.v2.clone()];
        out.extend(self.v3.iter().cloned());
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrenetOptions {
    pub kappa: f64,
    pub tau: f64,
    pub s_max: f64,
    pub step: f64,
}

/// Sampled solution of the Frenet–Serret system with constant κ, τ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrenetCurve {
    pub step: f64,
    pub s: Vec<f64>,
    pub u: Vec<DVector<f64>>,
    pub v1: Vec<DVector<f64>>,
    pub v2: Vec<DVector<f64>>,
    pub v3: Option<Vec<DVector<f64>>>,
    pub kappa: f64,
    pub tau: f64,
}

impl FrenetCurve {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// K² = κ² + τ².
    pub fn k_squared(&self) -> f64 {
        self.kappa * self.kappa + self.tau * self.tau
    }

    /// Largest deviation of (V1, V2, V3) from g-orthonormality.
    pub fn frame_drift(&self, m: &ChartManifold) -> Result<f64, Error> {
        let mut worst: f64 = 0.0;
        for i in 0..self.len() {
            let g = m.metric_at(self.u[i].as_slice())?;
            let mut vs = vec![self.v1[i].clone(), self.v2[i].clone()];
            if let Some(v3) = &self.v3 {
                vs.push(v3[i].clone());
            }
            worst = worst.max(orthonormality_defect(&vs, &g));
        }
        Ok(worst)
    }

    pub fn context(&self, m: &ChartManifold) -> Result<CurveContext, Error> {
        CurveContext::new(m, self.u.clone(), self.step, Some(self.v1.clone()))
    }
}

/// Integrate u' = V1 and
///
/// ```text
/// ∇V1 = κ V2
/// ∇V2 = −κ V1 + τ V3
/// ∇V3 = −τ V2
/// ```
///
/// with RK4 from the frame at `p`. The frame is not re-orthonormalized;
/// [`FrenetCurve::frame_drift`] measures how far it wanders.
pub fn generate_frenet_curve(
    m: &ChartManifold,
    p: &[f64],
    frame: &Frame,
    opts: FrenetOptions,
) -> Result<FrenetCurve, Error> {
    let FrenetOptions {
        kappa,
        tau,
        s_max,
        step,
    } = opts;
    let n = m.dim();
    if !(step > 0.0 && step <= MAX_STEP) {
        return Err(Error::InvalidParameter {
            name: "step",
            reason: format!("must lie in (0, {MAX_STEP}], got {step}"),
        });
    }
    if !(s_max > 0.0 && s_max.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "s_max",
            reason: format!("must be positive, got {s_max}"),
        });
    }
    if !(kappa >= 0.0 && kappa.is_finite() && tau.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "kappa",
            reason: format!("need kappa >= 0 and finite tau, got ({kappa}, {tau})"),
        });
    }
    if tau != 0.0 && frame.v3.is_none() {
        return Err(Error::InvalidParameter {
            name: "frame",
            reason: "nonzero torsion needs a third frame vector".into(),
        });
    }
    for v in frame.vectors() {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                what: "frame vector",
                expected: n,
                found: v.len(),
            });
        }
    }
    let g0 = m.metric_at(p)?;
    let deviation = orthonormality_defect(&frame.vectors(), &g0);
    if deviation > FRAME_TOL {
        return Err(Error::FrameNotOrthonormal { deviation });
    }

    let has_v3 = frame.v3.is_some();
    let blocks = if has_v3 { 4 } else { 3 };
    let mut y0 = Vec::with_capacity(blocks * n);
    y0.extend_from_slice(p);
    for v in frame.vectors() {
        y0.extend(v.iter());
    }

    let field = |s: f64, y: &[f64]| -> Result<Vec<f64>, Error> {
        let (u, rest) = y.split_at(n);
        // intermediate RK stages may cross the boundary first
        if let Some(coordinate) = m.domain_violation(u) {
            return Err(Error::LeftChart { s, coordinate });
        }
        let v1 = &rest[..n];
        let v2 = &rest[n..2 * n];
        let gamma = m.geometry_at(u)?.gamma;
        let g11 = gamma.contract(v1, v1);
        let g12 = gamma.contract(v1, v2);
        let mut dy = vec![0.0; y.len()];
        for k in 0..n {
            dy[k] = v1[k];
            dy[n + k] = -g11[k] + kappa * v2[k];
            dy[2 * n + k] = -g12[k] - kappa * v1[k];
        }
        if has_v3 {
            let v3 = &rest[2 * n..3 * n];
            let g13 = gamma.contract(v1, v3);
            for k in 0..n {
                dy[2 * n + k] += tau * v3[k];
                dy[3 * n + k] = -g13[k] - tau * v2[k];
            }
        }
        Ok(dy)
    };
    let check = |st: &OdeState| -> Result<(), Error> {
        match m.domain_violation(&st.y[..n]) {
            Some(coordinate) => Err(Error::LeftChart { s: st.s, coordinate }),
            None => Ok(()),
        }
    };
    let n_steps = (s_max / step).round() as usize;
    let states = rk4_integrate_checked(field, OdeState::new(0.0, y0), step, n_steps, check)?;

    let block = |st: &OdeState, b: usize| DVector::from_column_slice(&st.y[b * n..(b + 1) * n]);
    Ok(FrenetCurve {
        step,
        s: states.iter().map(|st| st.s).collect(),
        u: states.iter().map(|st| block(st, 0)).collect(),
        v1: states.iter().map(|st| block(st, 1)).collect(),
        v2: states.iter().map(|st| block(st, 2)).collect(),
        v3: has_v3.then(|| states.iter().map(|st| block(st, 3)).collect()),
        kappa,
        tau,
    })
}

/// Per-sample Frenet data estimated from a sampled curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Apparatus {
    pub speed: Vec<f64>,
    pub kappa: Vec<f64>,
    /// `None` where the curve is locally geodesic.
    pub tau: Vec<Option<f64>>,
    pub v1: Vec<DVector<f64>>,
    pub v2: Vec<Option<DVector<f64>>>,
    pub v3: Vec<Option<DVector<f64>>>,
}

/// Frenet apparatus of a unit-speed sampled curve.
///
/// `tangents` are used for V1 when given; otherwise the positions are
/// differentiated by stencil.
pub fn frenet_apparatus(
    m: &ChartManifold,
    positions: &[DVector<f64>],
    step: f64,
    tangents: Option<&[DVector<f64>]>,
) -> Result<Apparatus, Error> {
    let ctx = apparatus_context(m, positions, step, tangents)?;
    let deviation = ctx.speed_defect();
    if deviation > UNIT_SPEED_TOL {
        return Err(Error::NotUnitSpeed { deviation });
    }
    apparatus_from(m, &ctx)
}

/// Like [`frenet_apparatus`] but for any regular parametrization: the arc
/// length derivative is recovered as d/ds = (1/‖u̇‖) d/dt.
pub fn frenet_apparatus_any_speed(
    m: &ChartManifold,
    positions: &[DVector<f64>],
    step: f64,
    tangents: Option<&[DVector<f64>]>,
) -> Result<Apparatus, Error> {
    let ctx = apparatus_context(m, positions, step, tangents)?;
    apparatus_from(m, &ctx)
}

fn apparatus_context(
    m: &ChartManifold,
    positions: &[DVector<f64>],
    step: f64,
    tangents: Option<&[DVector<f64>]>,
) -> Result<CurveContext, Error> {
    if positions.len() < MIN_APPARATUS_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_APPARATUS_SAMPLES,
            found: positions.len(),
        });
    }
    if let Some(t) = tangents {
        check_grid(positions.len(), t)?;
    }
    CurveContext::new(m, positions.to_vec(), step, tangents.map(|t| t.to_vec()))
}

fn apparatus_from(m: &ChartManifold, ctx: &CurveContext) -> Result<Apparatus, Error> {
    let n = m.dim();
    let len = ctx.len();
    let speed: Vec<f64> = (0..len).map(|i| ctx.norm_at(i, &ctx.velocity[i])).collect();
    if let Some(i) = speed.iter().position(|s| !(*s > 0.0)) {
        return Err(Error::Degenerate {
            point: ctx.positions[i].iter().copied().collect(),
        });
    }
    let v1: Vec<DVector<f64>> = ctx.velocity.iter().zip(&speed).map(|(v, s)| v / *s).collect();
    let a = ctx.derivative(&v1)?;
    let mut kappa = vec![0.0; len];
    let mut v2: Vec<Option<DVector<f64>>> = vec![None; len];
    for i in 0..len {
        let an = ctx.norm_at(i, &a[i]);
        let k = an / speed[i];
        if k > KAPPA_FLOOR {
            kappa[i] = k;
            v2[i] = Some(&a[i] / an);
        }
    }

    let mut tau = vec![None; len];
    let mut v3 = vec![None; len];
    if n >= 2 {
        let v2_dense: Vec<DVector<f64>> = v2
            .iter()
            .map(|v| v.clone().unwrap_or_else(|| DVector::zeros(n)))
            .collect();
        let b = ctx.derivative(&v2_dense)?;
        for i in 0..len {
            let Some(v2i) = &v2[i] else { continue };
            if stencil::support(i, len).any(|j| v2[j].is_none()) {
                continue;
            }
            // ∇_s V2 / ‖u̇‖ + κ V1 = τ V3
            let c = &b[i] / speed[i] + &v1[i] * kappa[i];
            let g = &ctx.geometry[i].g;
            match n {
                2 => tau[i] = Some(0.0),
                3 => {
                    let w = cross(g, &ctx.geometry[i].g_inv, &v1[i], v2i);
                    tau[i] = Some(inner(g, &c, &w));
                    v3[i] = Some(w);
                }
                _ => {
                    let cn = norm(g, &c);
                    tau[i] = Some(cn);
                    if cn > KAPPA_FLOOR {
                        v3[i] = Some(c / cn);
                    }
                }
            }
        }
    }
    Ok(Apparatus {
        speed,
        kappa,
        tau,
        v1,
        v2,
        v3,
    })
}

/// Oriented cross product in a 3-dimensional inner product space:
/// wᵏ = √det g · gᵏˡ ε_lij aⁱ bʲ.
fn cross(g: &DMatrix<f64>, g_inv: &DMatrix<f64>, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    let lower = DVector::from_vec(vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]);
    g_inv * lower * g.determinant().sqrt()
}

/// Samples dropped at each end before taking spreads and sup-norms of
/// stencil-heavy quantities.
pub const BOUNDARY_SKIP: usize = 5;

/// sup_s ‖∇³V1 + K²∇V1‖ along a generated curve, over interior samples.
pub fn helix_residual(m: &ChartManifold, curve: &FrenetCurve) -> Result<f64, Error> {
    let ctx = curve.context(m)?;
    let d1 = ctx.derivative(&curve.v1)?;
    let d2 = ctx.derivative(&d1)?;
    let d3 = ctx.derivative(&d2)?;
    let k2 = curve.k_squared();
    Ok((BOUNDARY_SKIP..ctx.len().saturating_sub(BOUNDARY_SKIP))
        .map(|i| ctx.norm_at(i, &(&d3[i] + &d1[i] * k2)))
        .fold(0.0, f64::max))
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

    fn opts(kappa: f64, tau: f64, s_max: f64) -> FrenetOptions {
        FrenetOptions {
            kappa,
            tau,
            s_max,
            step: 1e-3,
        }
    }

    #[test]
    fn planar_unit_circle_reaches_antipode() {
        let m = ChartManifold::euclidean(2);
        let frame = Frame {
            v1: e(2, 0),
            v2: e(2, 1),
            v3: None,
        };
        let step = PI / 3142.0;
        let c = generate_frenet_curve(
            &m,
            &[0.0, 0.0],
            &frame,
            FrenetOptions {
                step,
                ..opts(1.0, 0.0, PI)
            },
        )
        .unwrap();
        let last = c.u.last().unwrap();
        assert!((last[0] - 0.0).abs() < 1e-8 && (last[1] - 2.0).abs() < 1e-8, "{last}");
    }

    #[test]
    fn circular_helix_in_space() {
        let m = ChartManifold::euclidean(3);
        let frame = Frame {
            v1: e(3, 0),
            v2: e(3, 1),
            v3: Some(e(3, 2)),
        };
        let c = generate_frenet_curve(&m, &[0.0; 3], &frame, opts(1.0, 1.0, 2.0)).unwrap();
        // radius κ/K² = 1/2, axis along (τ, 0, κ)/K, centred at (0, 1/2, 0)
        let k = 2f64.sqrt();
        for (s, u) in c.s.iter().zip(&c.u) {
            let w = s * k;
            let expected = [
                0.5 * w.sin() / k + 0.5 * s,
                0.5 * (1.0 - w.cos()),
                -0.5 * w.sin() / k + 0.5 * s,
            ];
            for a in 0..3 {
                assert!((u[a] - expected[a]).abs() < 1e-8, "s={s}");
            }
        }
    }

    #[test]
    fn sphere_small_circle_keeps_frame() {
        let m = ChartManifold::sphere(1.0);
        let frame = Frame {
            v1: e(2, 0),
            v2: e(2, 1),
            v3: None,
        };
        let c = generate_frenet_curve(&m, &[PI / 2.0, 0.0], &frame, opts(1.0, 0.0, 2.0 * PI)).unwrap();
        assert!(c.frame_drift(&m).unwrap() <= 1e-7);
    }

    #[test]
    fn leaving_the_chart_is_reported() {
        let m = ChartManifold::sphere(1.0);
        let frame = Frame {
            v1: -e(2, 0),
            v2: e(2, 1),
            v3: None,
        };
        let err = generate_frenet_curve(
            &m,
            &[PI / 2.0, 0.0],
            &frame,
            FrenetOptions {
                kappa: 0.0,
                ..opts(0.0, 0.0, PI)
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::LeftChart { coordinate: 0, .. }), "{err}");
    }

    #[test]
    fn rejects_skewed_frame_and_large_step() {
        let m = ChartManifold::euclidean(2);
        let frame = Frame {
            v1: e(2, 0),
            v2: DVector::from_vec(vec![0.1, 1.0]),
            v3: None,
        };
        assert!(matches!(
            generate_frenet_curve(&m, &[0.0, 0.0], &frame, opts(1.0, 0.0, 1.0)),
            Err(Error::FrameNotOrthonormal { .. })
        ));
        let frame = Frame {
            v1: e(2, 0),
            v2: e(2, 1),
            v3: None,
        };
        assert!(matches!(
            generate_frenet_curve(
                &m,
                &[0.0, 0.0],
                &frame,
                FrenetOptions {
                    step: 0.1,
                    ..opts(1.0, 0.0, 1.0)
                }
            ),
            Err(Error::InvalidParameter { name: "step", .. })
        ));
    }

    #[test]
    fn straight_line_has_no_curvature() {
        let m = ChartManifold::euclidean(3);
        let h = 1e-2;
        let pts: Vec<DVector<f64>> = (0..20)
            .map(|k| DVector::from_vec(vec![k as f64 * h * 0.6, k as f64 * h * 0.8, 1.0]))
            .collect();
        let ap = frenet_apparatus(&m, &pts, h, None).unwrap();
        assert!(ap.kappa.iter().all(|k| *k == 0.0));
        assert!(ap.tau.iter().all(Option::is_none));
    }

    #[test]
    fn circle_of_radius_one_third() {
        let m = ChartManifold::euclidean(2);
        let h = 1e-3;
        let pts: Vec<DVector<f64>> = (0..200)
            .map(|k| {
                let s = k as f64 * h;
                DVector::from_vec(vec![(3.0 * s).cos() / 3.0, (3.0 * s).sin() / 3.0])
            })
            .collect();
        let ap = frenet_apparatus(&m, &pts, h, None).unwrap();
        assert!(ap.kappa.iter().all(|k| (k - 3.0).abs() < 1e-6));
    }

    #[test]
    fn round_trip_helix() {
        let m = ChartManifold::euclidean(3);
        let frame = Frame {
            v1: e(3, 0),
            v2: e(3, 1),
            v3: Some(e(3, 2)),
        };
        let c = generate_frenet_curve(&m, &[0.0; 3], &frame, opts(2.0, 0.5, 1.0)).unwrap();
        let ap = frenet_apparatus(&m, &c.u, c.step, None).unwrap();
        for i in 5..c.len() - 5 {
            assert!((ap.kappa[i] - 2.0).abs() < 1e-5);
            assert!((ap.tau[i].unwrap() - 0.5).abs() < 1e-5);
        }
        assert!(helix_residual(&m, &c).unwrap() < 1e-3);
    }

    #[test]
    fn non_unit_speed_rejected_unless_requested() {
        let m = ChartManifold::euclidean(2);
        let h = 1e-2;
        let pts: Vec<DVector<f64>> = (0..40)
            .map(|k| {
                let t = k as f64 * h;
                DVector::from_vec(vec![2.0 * t.cos(), 2.0 * t.sin()])
            })
            .collect();
        assert!(matches!(
            frenet_apparatus(&m, &pts, h, None),
            Err(Error::NotUnitSpeed { .. })
        ));
        let ap = frenet_apparatus_any_speed(&m, &pts, h, None).unwrap();
        assert!(ap.kappa.iter().all(|k| (k - 0.5).abs() < 1e-6));
    }
}
