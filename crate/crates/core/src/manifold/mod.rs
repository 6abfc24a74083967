//! Riemannian manifolds described by a single coordinate chart.

mod covariant;
mod curve;

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::exprlang::Expr;
use crate::numcore::linalg::min_eigenvalue;
use crate::numcore::{jet2, Dual2, Scalar, Tensor3, VectorFunction};
use crate::Error;

pub use covariant::{covariant_derivative_along, CurveContext};
pub use curve::{
    frenet_apparatus, frenet_apparatus_any_speed, generate_frenet_curve, helix_residual, Apparatus, Frame, FrenetCurve,
    FrenetOptions, BOUNDARY_SKIP, KAPPA_FLOOR,
};

/// Smallest eigenvalue a metric may have before it is rejected.
pub const SPD_FLOOR: f64 = 1e-10;

/// Sphere charts keep the polar angles this far from the coordinate poles.
pub const SPHERE_POLAR_MARGIN: f64 = 0.05;

/// Open interval; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    Euclidean,
    /// Round sphere of the given radius in hyperspherical coordinates
    /// `(a_1, .., a_{d-1}, φ)`.
    Sphere {
        radius: f64,
    },
    /// Entries `g_ij` as expressions, row-major.
    Custom {
        entries: Vec<Expr>,
    },
    /// Metric induced by an immersion into Euclidean space.
    Pullback {
        components: Vec<Expr>,
    },
}

/// A coordinate chart with a metric.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartManifold {
    name: String,
    dim: usize,
    domain: Vec<Interval>,
    metric: Metric,
}

/// Metric data at one point.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    /// `gamma[k, i, j]` is Γᵏᵢⱼ.
    pub gamma: Tensor3,
}

impl ChartManifold {
    pub fn euclidean(n: usize) -> Self {
        ChartManifold {
            name: format!("euclidean{{{n}}}"),
            dim: n,
            domain: vec![Interval::REAL_LINE; n],
            metric: Metric::Euclidean,
        }
    }

    /// The 2-sphere of radius `r` in the chart (θ, φ).
    pub fn sphere(r: f64) -> Self {
        let mut m = Self::hypersphere(r, 2);
        m.name = format!("sphere{{{r}}}");
        m
    }

    /// The `d`-sphere of radius `r`. The azimuth φ (last coordinate) is not
    /// wrapped, so curves may wind around freely.
    pub fn hypersphere(r: f64, d: usize) -> Self {
        let mut domain = vec![Interval::new(SPHERE_POLAR_MARGIN, std::f64::consts::PI - SPHERE_POLAR_MARGIN); d];
        domain[d - 1] = Interval::REAL_LINE;
        ChartManifold {
            name: format!("sphere{{{r},{d}}}"),
            dim: d,
            domain,
            metric: Metric::Sphere { radius: r },
        }
    }

    /// Metric given entry by entry (`dim²` expressions, row-major) or by its
    /// diagonal (`dim` expressions).
    pub fn custom(dim: usize, entries: Vec<Expr>, domain: Vec<Interval>) -> Result<Self, Error> {
        let entries = if entries.len() == dim && dim > 1 {
            let mut full = vec![Expr::Const(0.0); dim * dim];
            for (i, e) in entries.into_iter().enumerate() {
                full[i * dim + i] = e;
            }
            full
        } else {
            entries
        };
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                what: "metric entries",
                expected: dim * dim,
                found: entries.len(),
            });
        }
        check_domain_len(dim, &domain)?;
        Ok(ChartManifold {
            name: "custom".into(),
            dim,
            domain,
            metric: Metric::Custom { entries },
        })
    }

    /// Metric pulled back from Euclidean space by the given components.
    pub fn pullback(dim: usize, components: Vec<Expr>, domain: Vec<Interval>) -> Result<Self, Error> {
        if components.is_empty() {
            return Err(Error::InvalidParameter {
                name: "components",
                reason: "pullback metric needs at least one component".into(),
            });
        }
        check_domain_len(dim, &domain)?;
        Ok(ChartManifold {
            name: "pullback".into(),
            dim,
            domain,
            metric: Metric::Pullback { components },
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &[Interval] {
        &self.domain
    }

    pub fn metric_kind(&self) -> &Metric {
        &self.metric
    }

    pub fn is_flat_euclidean(&self) -> bool {
        matches!(self.metric, Metric::Euclidean)
    }

    /// Index of the first coordinate outside its interval (or non-finite).
    pub fn domain_violation(&self, u: &[f64]) -> Option<usize> {
        u.iter()
            .zip(&self.domain)
            .position(|(x, iv)| !x.is_finite() || !iv.contains(*x))
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.dim && self.domain_violation(u).is_none()
    }

    fn check_point(&self, u: &[f64]) -> Result<(), Error> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch {
                what: "point",
                expected: self.dim,
                found: u.len(),
            });
        }
        if self.domain_violation(u).is_some() {
            return Err(Error::OutsideDomain { point: u.to_vec() });
        }
        Ok(())
    }

    /// Metric matrix at `u`, checked symmetric positive definite.
    pub fn metric_at(&self, u: &[f64]) -> Result<DMatrix<f64>, Error> {
        self.check_point(u)?;
        let n = self.dim;
        let g = match &self.metric {
            Metric::Euclidean => DMatrix::identity(n, n),
            Metric::Sphere { radius } => DMatrix::from_diagonal(&DVector::from_vec(sphere_diagonal(*radius, u))),
            Metric::Custom { entries } => {
                let vals = entries.iter().map(|e| e.eval(u)).collect::<Result<Vec<f64>, _>>()?;
                DMatrix::from_row_slice(n, n, &vals)
            }
            Metric::Pullback { components } => {
                let j = jet2(
                    &ExprComponents {
                        exprs: components,
                        arity: n,
                    },
                    u,
                )?
                .jacobian;
                j.transpose() * j
            }
        };
        validate_spd(&g)?;
        Ok(g)
    }

    /// Metric and its first partials: `dg[k]` is ∂ₖg.
    pub fn metric_with_derivatives(&self, u: &[f64]) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>), Error> {
        self.check_point(u)?;
        let n = self.dim;
        let (g, dg) = match &self.metric {
            Metric::Euclidean => (DMatrix::identity(n, n), vec![DMatrix::zeros(n, n); n]),
            Metric::Sphere { radius } => {
                // ∂ₘ g_kk = 2 sin aₘ cos aₘ r² ∏_{i<k, i≠m} sin² aᵢ for m < k
                let r2 = radius * radius;
                let (sin, cos): (Vec<f64>, Vec<f64>) = u.iter().map(|a| a.sin_cos()).unzip();
                let mut g = DMatrix::zeros(n, n);
                let mut dg = vec![DMatrix::zeros(n, n); n];
                for k in 0..n {
                    g[(k, k)] = (0..k).fold(r2, |acc, i| acc * sin[i] * sin[i]);
                    for (m, dgm) in dg.iter_mut().enumerate().take(k) {
                        dgm[(k, k)] = (0..k)
                            .filter(|&i| i != m)
                            .fold(2.0 * r2 * sin[m] * cos[m], |acc, i| acc * sin[i] * sin[i]);
                    }
                }
                (g, dg)
            }
            Metric::Custom { entries } => {
                let x = Dual2::seed(u);
                let mut g = DMatrix::zeros(n, n);
                let mut dg = vec![DMatrix::zeros(n, n); n];
                for (idx, e) in entries.iter().enumerate() {
                    let v = e.eval(&x)?;
                    let (i, j) = (idx / n, idx % n);
                    g[(i, j)] = v.val();
                    let grad = v.gradient(n);
                    for k in 0..n {
                        dg[k][(i, j)] = grad[k];
                    }
                }
                (g, dg)
            }
            Metric::Pullback { components } => {
                let jet = jet2(
                    &ExprComponents {
                        exprs: components,
                        arity: n,
                    },
                    u,
                )?;
                let j = &jet.jacobian;
                let g = j.transpose() * j;
                let mut dg = vec![DMatrix::zeros(n, n); n];
                for (k, dgk) in dg.iter_mut().enumerate() {
                    for i in 0..n {
                        for jj in 0..n {
                            let mut acc = 0.0;
                            for a in 0..j.nrows() {
                                acc += jet.hessian.get(a, k, i) * j[(a, jj)] + j[(a, i)] * jet.hessian.get(a, k, jj);
                            }
                            dgk[(i, jj)] = acc;
                        }
                    }
                }
                (g, dg)
            }
        };
        validate_spd(&g)?;
        Ok((g, dg))
    }

    /// Metric, inverse metric and Christoffel symbols at `u`.
    pub fn geometry_at(&self, u: &[f64]) -> Result<PointGeometry, Error> {
        let (g, dg) = self.metric_with_derivatives(u)?;
        let n = self.dim;
        let g_inv = g
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite {
                min_eigenvalue: min_eigenvalue(&g),
            })?
            .inverse();
        let gamma = if matches!(self.metric, Metric::Euclidean) {
            Tensor3::zeros(n, n, n)
        } else {
            christoffel_from(&g_inv, &dg)
        };
        Ok(PointGeometry { g, g_inv, gamma })
    }

    pub fn inner_at(&self, u: &[f64], x: &DVector<f64>, y: &DVector<f64>) -> Result<f64, Error> {
        let g = self.metric_at(u)?;
        Ok(crate::numcore::linalg::inner(&g, x, y))
    }
}

impl fmt::Display for ChartManifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Levi-Civita connection coefficients at `u`.
pub fn christoffel(m: &ChartManifold, u: &[f64]) -> Result<Tensor3, Error> {
    Ok(m.geometry_at(u)?.gamma)
}

/// Γᵏᵢⱼ = ½ gᵏˡ (∂ᵢg_jl + ∂ⱼg_il − ∂ₗg_ij).
pub fn christoffel_from(g_inv: &DMatrix<f64>, dg: &[DMatrix<f64>]) -> Tensor3 {
    let n = g_inv.nrows();
    let mut gamma = Tensor3::zeros(n, n, n);
    for i in 0..n {
        for j in i..n {
            // lowered symbol Γ_lij
            let lowered: Vec<f64> = (0..n)
                .map(|l| 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]))
                .collect();
            for k in 0..n {
                let v: f64 = (0..n).map(|l| g_inv[(k, l)] * lowered[l]).sum();
                gamma.set(k, i, j, v);
                gamma.set(k, j, i, v);
            }
        }
    }
    gamma
}

fn validate_spd(g: &DMatrix<f64>) -> Result<(), Error> {
    let n = g.nrows();
    let scale = g.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    for i in 0..n {
        for j in (i + 1)..n {
            if (g[(i, j)] - g[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::InvalidParameter {
                    name: "metric",
                    reason: format!("not symmetric at entry ({}, {})", i + 1, j + 1),
                });
            }
        }
    }
    let lam = min_eigenvalue(g);
    if !(lam > SPD_FLOOR) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: lam });
    }
    Ok(())
}

fn check_domain_len(dim: usize, domain: &[Interval]) -> Result<(), Error> {
    if dim == 0 {
        return Err(Error::InvalidParameter {
            name: "dim",
            reason: "must be at least 1".into(),
        });
    }
    if domain.len() != dim {
        return Err(Error::DimensionMismatch {
            what: "chart domain",
            expected: dim,
            found: domain.len(),
        });
    }
    Ok(())
}

/// Diagonal of the round metric: g_11 = r², g_kk = r² ∏_{i<k} sin² aᵢ.
fn sphere_diagonal<S: Scalar>(r: f64, u: &[S]) -> Vec<S> {
    let mut out = Vec::with_capacity(u.len());
    let mut factor = S::from_f64(r * r);
    for (k, a) in u.iter().enumerate() {
        out.push(factor.clone());
        if k + 1 < u.len() {
            let s = a.clone().sin();
            factor = factor * s.clone() * s;
        }
    }
    out
}

/// Cartesian coordinates of the point with hyperspherical coordinates `u`
/// on the sphere of radius `r` in ℝ^{d+1}.
///
/// For d = 2 this is `(r sinθ cosφ, r sinθ sinφ, r cosθ)`.
pub fn sphere_embedding<S: Scalar>(r: f64, u: &[S]) -> Vec<S> {
    let d = u.len();
    let angles = &u[..d - 1];
    let phi = &u[d - 1];
    let sines: Vec<S> = angles.iter().map(|a| a.clone().sin()).collect();
    let prefix = |count: usize| -> S { sines[..count].iter().fold(S::from_f64(r), |acc, s| acc * s.clone()) };
    let full = prefix(d - 1);
    let mut out = Vec::with_capacity(d + 1);
    out.push(full.clone() * phi.clone().cos());
    out.push(full * phi.clone().sin());
    for j in 2..=d {
        let count = d - j;
        out.push(prefix(count) * angles[count].clone().cos());
    }
    out
}

/// Expression list viewed as a vector function.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprComponents<'a> {
    pub exprs: &'a [Expr],
    pub arity: usize,
}

impl VectorFunction for ExprComponents<'_> {
    fn input_dim(&self) -> usize {
        self.arity
    }

    fn output_dim(&self) -> usize {
        self.exprs.len()
    }

    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>, crate::exprlang::EvalError> {
        self.exprs.iter().map(|e| e.eval(x)).collect()
    }
}
