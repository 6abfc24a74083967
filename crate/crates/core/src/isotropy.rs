//! Isotropy and umbilicity of maps, and composition of maps.
//!
//! λ(X) = ‖(∇T_*)(X,X)‖ / ‖T_*X‖² for unit horizontal X. A map is isotropic
//! at a point when λ does not depend on X there; equivalently
//! g((∇T_*)(X,X), (∇T_*)(X,Y)) = 0 for every orthonormal horizontal pair.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::rmap::{jet, MapFormula, MapJet, SmoothMap, NORMAL_TOL};
use crate::{par, sampling, Error};

pub const DEFAULT_TOL: f64 = 1e-6;
const MIN_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsotropyVerdict {
    IsotropicAtTol,
    NotIsotropic,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotropyReport {
    pub point: Vec<f64>,
    pub lambda_mean: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lemma_residual: f64,
    pub sample_count: usize,
    pub seed: u64,
    pub verdict: IsotropyVerdict,
}

impl IsotropyReport {
    pub fn lambda_spread(&self) -> f64 {
        self.lambda_max - self.lambda_min
    }

    pub fn is_isotropic(&self) -> bool {
        self.verdict == IsotropyVerdict::IsotropicAtTol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UmbilicityReport {
    pub h2: Vec<f64>,
    pub residual: f64,
    pub offdiag: f64,
}

/// λ(X) for a unit horizontal X.
pub fn lambda_of(jt: &MapJet, x: &DVector<f64>) -> Result<f64, Error> {
    let nx = jt.norm1(x);
    if (nx - 1.0).abs() > NORMAL_TOL {
        return Err(Error::NotUnit { norm: nx });
    }
    let vertical = jt.norm1(&jt.project_kernel(x));
    if vertical > NORMAL_TOL {
        return Err(Error::NotHorizontal { residual: vertical });
    }
    Ok(lambda_unchecked(jt, x))
}

fn lambda_unchecked(jt: &MapJet, x: &DVector<f64>) -> f64 {
    let pushed = jt.norm2(&jt.push(x));
    jt.norm2(&jt.sff(x, x)) / (pushed * pushed)
}

/// Sample λ over seeded unit horizontal directions and the pairwise
/// criterion over seeded orthonormal pairs.
pub fn isotropy_test(t: &SmoothMap, p: &[f64], samples: usize, seed: u64, tol: f64) -> Result<IsotropyReport, Error> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidParameter {
            name: "samples",
            reason: format!("need at least {MIN_SAMPLES}, got {samples}"),
        });
    }
    let jt = jet(t, p)?;
    isotropy_of(&jt, samples, seed, tol)
}

pub fn isotropy_of(jt: &MapJet, samples: usize, seed: u64, tol: f64) -> Result<IsotropyReport, Error> {
    let draws = par::map_indexed(samples, |k| {
        let mut rng = sampling::stream(seed, k as u64);
        let x = jt.random_unit_horizontal(&mut rng);
        let lambda = lambda_unchecked(jt, &x);
        let pair = jt.random_orthonormal_pair(&mut rng).ok().map(|(x, y)| {
            let sxx = jt.sff(&x, &x);
            jt.inner2(&sxx, &jt.sff(&x, &y)).abs()
        });
        (lambda, pair)
    });
    let lambdas: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let lambda_min = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    let lambda_max = lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lambda_mean = lambdas.iter().sum::<f64>() / samples as f64;
    let lemma_residual = draws.iter().filter_map(|d| d.1).fold(0.0, f64::max);
    let verdict = if jt.rank < 2 {
        IsotropyVerdict::Degenerate
    } else if lambda_max - lambda_min <= tol && lemma_residual <= tol {
        IsotropyVerdict::IsotropicAtTol
    } else {
        IsotropyVerdict::NotIsotropic
    };
    Ok(IsotropyReport {
        point: jt.p.iter().copied().collect(),
        lambda_mean,
        lambda_min,
        lambda_max,
        lemma_residual,
        sample_count: samples,
        seed,
        verdict,
    })
}

/// Normal part of the average of (∇T_*)(hᵢ, hᵢ) over a horizontal
/// orthonormal basis.
pub fn mean_curvature_of(jt: &MapJet) -> DVector<f64> {
    let mut acc = DVector::zeros(jt.target_dim());
    for h in &jt.horiz_basis {
        acc += jt.sff(h, h);
    }
    jt.project_normal(&(acc / jt.rank as f64))
}

pub fn mean_curvature(t: &SmoothMap, p: &[f64]) -> Result<DVector<f64>, Error> {
    Ok(mean_curvature_of(&jet(t, p)?))
}

pub fn umbilicity_test(t: &SmoothMap, p: &[f64]) -> Result<UmbilicityReport, Error> {
    umbilicity_of(&jet(t, p)?)
}

/// Compare each S_U with g(H₂, U)·Id on the range, and measure the
/// off-diagonal second fundamental form.
pub fn umbilicity_of(jt: &MapJet) -> Result<UmbilicityReport, Error> {
    if jt.rank < 2 {
        return Err(Error::RankTooSmall {
            rank: jt.rank,
            needed: 2,
        });
    }
    let h2 = mean_curvature_of(jt);
    let mut residual: f64 = 0.0;
    for u in &jt.normal_basis {
        let scale = jt.inner2(&h2, u);
        for (i, hi) in jt.horiz_basis.iter().enumerate() {
            let su = jt.shape_operator(u, hi)?;
            for (j, jhj) in jt.pushed_horiz.iter().enumerate() {
                let delta = if i == j { 1.0 } else { 0.0 };
                residual = residual.max((jt.inner2(&su, jhj) - scale * delta).abs());
            }
        }
    }
    let mut offdiag: f64 = 0.0;
    for (i, hi) in jt.horiz_basis.iter().enumerate() {
        for hj in &jt.horiz_basis[i + 1..] {
            offdiag = offdiag.max(jt.norm2(&jt.sff(hi, hj)));
        }
    }
    Ok(UmbilicityReport {
        h2: h2.iter().copied().collect(),
        residual,
        offdiag,
    })
}

/// ψ ∘ φ. Expression maps compose by substitution; anything else by
/// function composition.
pub fn compose(phi: &SmoothMap, psi: &SmoothMap) -> Result<SmoothMap, Error> {
    if phi.target() != psi.source() {
        return Err(Error::ChartMismatch(format!(
            "target of {} is {}, source of {} is {}",
            phi.name(),
            phi.target(),
            psi.name(),
            psi.source()
        )));
    }
    let formula = match (phi.formula(), psi.formula()) {
        (
            MapFormula::Custom {
                components: inner,
                arity,
            },
            MapFormula::Custom { components: outer, .. },
        ) => MapFormula::Custom {
            components: outer.iter().map(|e| e.substitute(inner)).collect(),
            arity: *arity,
        },
        (inner, outer) => MapFormula::Compose {
            inner: Box::new(inner.clone()),
            outer: Box::new(outer.clone()),
        },
    };
    SmoothMap::new(
        format!("{}.{}", psi.name(), phi.name()),
        phi.source().clone(),
        psi.target().clone(),
        formula,
    )
}

/// ‖(∇(ψ∘φ)_*)(X,Y) − ψ_*((∇φ_*)(X,Y)) − (∇ψ_*)(φ_*X, φ_*Y)‖, each side
/// from its own jet.
pub fn composition_residual(
    phi: &SmoothMap,
    psi: &SmoothMap,
    p: &[f64],
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<f64, Error> {
    let whole = compose(phi, psi)?;
    let lhs_jet = jet(&whole, p)?;
    let lhs = lhs_jet.sff(x, y);
    let jphi = jet(phi, p)?;
    let mid: Vec<f64> = jphi.q.iter().copied().collect();
    let jpsi = jet(psi, &mid)?;
    let rhs = jpsi.push(&jphi.sff(x, y)) + jpsi.sff(&jphi.push(x), &jphi.push(y));
    Ok(lhs_jet.norm2(&(lhs - rhs)))
}
