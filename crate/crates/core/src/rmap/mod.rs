//! Smooth maps between chart manifolds and their extrinsic geometry.
//!
//! A [`SmoothMap`] pairs a coordinate formula with source and target charts.
//! [`jet`] evaluates its differential, second derivatives and the induced
//! splits `ker ⊕ horizontal` and `range ⊕ normal`; [`MapJet`] then answers
//! pointwise questions (second fundamental form, shape operator, adjoint).
//! [`MapCurveContext`] does the same along a sampled source curve.

mod along;
mod jet;

use std::fmt;

use crate::exprlang::{parse, EvalError, Expr};
use crate::manifold::{sphere_embedding, ChartManifold};
use crate::numcore::{Scalar, VectorFunction};
use crate::Error;

pub use along::{lemma21_residual, nabla_sff, normal_connection_along, Lemma21, MapCurveContext};
pub use jet::{
    adjoint_pushforward, check_normal_valued, is_riemannian_at, jet, jet_with_source, second_fundamental_form,
    shape_operator, MapJet, RiemannianCheck, NORMAL_TOL,
};

/// Coordinate formula of a map.
#[derive(Debug, Clone, PartialEq)]
pub enum MapFormula {
    Identity {
        n: usize,
    },
    /// Round sphere of radius `radius` and dimension `dim` into ℝ^{dim+1}.
    SphereImmersion {
        radius: f64,
        dim: usize,
    },
    /// Keep the first `n` of `m` coordinates.
    Projection {
        m: usize,
        n: usize,
    },
    Scaling {
        c: f64,
        n: usize,
    },
    Custom {
        components: Vec<Expr>,
        arity: usize,
    },
    /// `outer ∘ inner`.
    Compose {
        inner: Box<MapFormula>,
        outer: Box<MapFormula>,
    },
}

impl VectorFunction for MapFormula {
    fn input_dim(&self) -> usize {
        match self {
            MapFormula::Identity { n } | MapFormula::Scaling { n, .. } => *n,
            MapFormula::SphereImmersion { dim, .. } => *dim,
            MapFormula::Projection { m, .. } => *m,
            MapFormula::Custom { arity, .. } => *arity,
            MapFormula::Compose { inner, .. } => inner.input_dim(),
        }
    }

    fn output_dim(&self) -> usize {
        match self {
            MapFormula::Identity { n } | MapFormula::Scaling { n, .. } | MapFormula::Projection { n, .. } => *n,
            MapFormula::SphereImmersion { dim, .. } => dim + 1,
            MapFormula::Custom { components, .. } => components.len(),
            MapFormula::Compose { outer, .. } => outer.output_dim(),
        }
    }

    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>, EvalError> {
        if x.len() != self.input_dim() {
            return Err(EvalError::Arity {
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        Ok(match self {
            MapFormula::Identity { .. } => x.to_vec(),
            MapFormula::SphereImmersion { radius, .. } => sphere_embedding(*radius, x),
            MapFormula::Projection { n, .. } => x[..*n].to_vec(),
            MapFormula::Scaling { c, .. } => x.iter().map(|v| v.clone().scale(*c)).collect(),
            MapFormula::Custom { components, .. } => components.iter().map(|e| e.eval(x)).collect::<Result<_, _>>()?,
            MapFormula::Compose { inner, outer } => outer.eval(&inner.eval(x)?)?,
        })
    }
}

/// Smooth map `T: source → target` in coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothMap {
    name: String,
    source: ChartManifold,
    target: ChartManifold,
    formula: MapFormula,
}

impl SmoothMap {
    pub fn new(
        name: impl Into<String>,
        source: ChartManifold,
        target: ChartManifold,
        formula: MapFormula,
    ) -> Result<Self, Error> {
        if formula.input_dim() != source.dim() {
            return Err(Error::DimensionMismatch {
                what: "map arity vs source dimension",
                expected: source.dim(),
                found: formula.input_dim(),
            });
        }
        if formula.output_dim() != target.dim() {
            return Err(Error::DimensionMismatch {
                what: "map components vs target dimension",
                expected: target.dim(),
                found: formula.output_dim(),
            });
        }
        Ok(SmoothMap {
            name: name.into(),
            source,
            target,
            formula,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(
            format!("identity{{{n}}}"),
            ChartManifold::euclidean(n),
            ChartManifold::euclidean(n),
            MapFormula::Identity { n },
        )
        .expect("dimensions agree")
    }

    /// Inclusion of the round 2-sphere of radius `r` into ℝ³.
    pub fn sphere_immersion(r: f64) -> Self {
        Self::new(
            format!("sphere_immersion{{{r}}}"),
            ChartManifold::sphere(r),
            ChartManifold::euclidean(3),
            MapFormula::SphereImmersion { radius: r, dim: 2 },
        )
        .expect("dimensions agree")
    }

    /// Inclusion of the round `d`-sphere into ℝ^{d+1}.
    pub fn hypersphere_immersion(r: f64, d: usize) -> Self {
        Self::new(
            format!("sphere_immersion{{{r},{d}}}"),
            ChartManifold::hypersphere(r, d),
            ChartManifold::euclidean(d + 1),
            MapFormula::SphereImmersion { radius: r, dim: d },
        )
        .expect("dimensions agree")
    }

    /// ℝᵐ → ℝⁿ dropping the last m − n coordinates.
    pub fn projection(m: usize, n: usize) -> Result<Self, Error> {
        if n == 0 || n > m {
            return Err(Error::InvalidParameter {
                name: "projection",
                reason: format!("need 0 < n <= m, got m={m}, n={n}"),
            });
        }
        Self::new(
            format!("projection{{{m},{n}}}"),
            ChartManifold::euclidean(m),
            ChartManifold::euclidean(n),
            MapFormula::Projection { m, n },
        )
    }

    /// x ↦ c·x on ℝⁿ.
    pub fn scaling(c: f64, n: usize) -> Self {
        Self::new(
            format!("scaling{{{c}}}"),
            ChartManifold::euclidean(n),
            ChartManifold::euclidean(n),
            MapFormula::Scaling { c, n },
        )
        .expect("dimensions agree")
    }

    pub fn custom(source: ChartManifold, target: ChartManifold, components: Vec<Expr>) -> Result<Self, Error> {
        let arity = source.dim();
        if let Some(e) = components.iter().find(|e| e.min_arity() > arity) {
            return Err(Error::DimensionMismatch {
                what: "map arity vs source dimension",
                expected: arity,
                found: e.min_arity(),
            });
        }
        Self::new("custom", source, target, MapFormula::Custom { components, arity })
    }

    /// The factors (φ, ψ) of the worked example: φ: ℝ⁴ → ℝ² is the
    /// submersion ((x₁ − x₂)/√2, x₃) and ψ: ℝ² → ℝ³ is (u₁² − u₂², 2u₁u₂, 0).
    pub fn paper_example_factors() -> (SmoothMap, SmoothMap) {
        let p = |src: &str, arity| parse(src, arity).expect("built-in formula parses");
        let phi = SmoothMap::custom(
            ChartManifold::euclidean(4),
            ChartManifold::euclidean(2),
            vec![p("(x1 - x2)/sqrt(2)", 4), p("x3", 4)],
        )
        .expect("dimensions agree")
        .with_name("paper_example.phi");
        let psi = SmoothMap::custom(
            ChartManifold::euclidean(2),
            ChartManifold::euclidean(3),
            vec![p("x1^2 - x2^2", 2), p("2*x1*x2", 2), p("0", 2)],
        )
        .expect("dimensions agree")
        .with_name("paper_example.psi");
        (phi, psi)
    }

    /// ψ ∘ φ for the factors of [`SmoothMap::paper_example_factors`].
    pub fn paper_example() -> Self {
        let (phi, psi) = Self::paper_example_factors();
        crate::isotropy::compose(&phi, &psi)
            .expect("factors share the middle chart")
            .with_name("paper_example")
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &ChartManifold {
        &self.source
    }

    pub fn target(&self) -> &ChartManifold {
        &self.target
    }

    pub fn formula(&self) -> &MapFormula {
        &self.formula
    }

    pub fn apply(&self, p: &[f64]) -> Result<Vec<f64>, Error> {
        Ok(self.formula.eval(p)?)
    }
}

impl VectorFunction for SmoothMap {
    fn input_dim(&self) -> usize {
        self.formula.input_dim()
    }

    fn output_dim(&self) -> usize {
        self.formula.output_dim()
    }

    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>, EvalError> {
        self.formula.eval(x)
    }
}

impl fmt::Display for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} -> {}", self.name, self.source, self.target)
    }
}
