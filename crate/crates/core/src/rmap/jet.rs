use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::SmoothMap;
use crate::manifold::PointGeometry;
use crate::numcore::linalg::{complement, inner, metric_svd, norm, orthonormalize, spd_solve};
use crate::numcore::{jet2, Tensor3};
use crate::sampling::{self, Rng};
use crate::Error;

/// Tolerance for "lies in the normal space" and "is horizontal".
pub const NORMAL_TOL: f64 = 1e-8;

/// First- and second-order data of a map at one point.
#[derive(Debug, Clone)]
pub struct MapJet {
    pub p: DVector<f64>,
    pub q: DVector<f64>,
    /// n×m differential.
    pub j: DMatrix<f64>,
    /// `h[a, i, j]` = ∂ᵢ∂ⱼTᵃ.
    pub h: Tensor3,
    pub g1: DMatrix<f64>,
    pub g2: DMatrix<f64>,
    pub gamma1: Tensor3,
    pub gamma2: Tensor3,
    pub ker_basis: Vec<DVector<f64>>,
    pub horiz_basis: Vec<DVector<f64>>,
    pub range_basis: Vec<DVector<f64>>,
    pub normal_basis: Vec<DVector<f64>>,
    /// J hᵢ for the horizontal basis.
    pub pushed_horiz: Vec<DVector<f64>>,
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

/// Evaluate the jet of `t` at `p`.
pub fn jet(t: &SmoothMap, p: &[f64]) -> Result<MapJet, Error> {
    jet_with_source(t, p, t.source().geometry_at(p)?)
}

/// [`jet`] reusing source geometry already evaluated at `p`.
pub fn jet_with_source(t: &SmoothMap, p: &[f64], src: PointGeometry) -> Result<MapJet, Error> {
    let j2 = jet2(t, p)?;
    let q: Vec<f64> = j2.value.iter().copied().collect();
    if !t.target().contains(&q) {
        return Err(Error::OutsideDomain { point: q });
    }
    let dst = t.target().geometry_at(&q)?;
    let split = metric_svd(&j2.jacobian, &src.g, &dst.g)?;
    let rank = split.row_space.len();
    if rank == 0 {
        return Err(Error::Degenerate { point: p.to_vec() });
    }
    let pushed_horiz: Vec<DVector<f64>> = split.row_space.iter().map(|h| &j2.jacobian * h).collect();
    let range_basis = orthonormalize(&pushed_horiz, &dst.g)?;
    let normal_basis = complement(&range_basis, &dst.g)?;
    Ok(MapJet {
        p: DVector::from_column_slice(p),
        q: j2.value,
        j: j2.jacobian,
        h: j2.hessian,
        g1: src.g,
        g2: dst.g,
        gamma1: src.gamma,
        gamma2: dst.gamma,
        ker_basis: split.kernel,
        horiz_basis: split.row_space,
        range_basis,
        normal_basis,
        pushed_horiz,
        singular_values: split.singular_values,
        rank,
    })
}

fn project(basis: &[DVector<f64>], g: &DMatrix<f64>, w: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(w.len());
    for b in basis {
        out.axpy(inner(g, w, b), b, 1.0);
    }
    out
}

impl MapJet {
    pub fn source_dim(&self) -> usize {
        self.j.ncols()
    }

    pub fn target_dim(&self) -> usize {
        self.j.nrows()
    }

    /// T_* x.
    pub fn push(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.j * x
    }

    /// (∇T_*)(X, Y)ᵃ = XⁱYʲ(Hᵃᵢⱼ − Γ¹ᵏᵢⱼ Jᵃₖ + Γ²ᵃ_bc Jᵇᵢ Jᶜⱼ).
    pub fn sff(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let hxy = DVector::from_vec(self.h.contract(x.as_slice(), y.as_slice()));
        let conn = DVector::from_vec(self.gamma1.contract(x.as_slice(), y.as_slice()));
        let jx = self.push(x);
        let jy = self.push(y);
        let target = DVector::from_vec(self.gamma2.contract(jx.as_slice(), jy.as_slice()));
        hxy - &self.j * conn + target
    }

    pub fn project_range(&self, w: &DVector<f64>) -> DVector<f64> {
        project(&self.range_basis, &self.g2, w)
    }

    pub fn project_normal(&self, w: &DVector<f64>) -> DVector<f64> {
        project(&self.normal_basis, &self.g2, w)
    }

    pub fn project_horizontal(&self, x: &DVector<f64>) -> DVector<f64> {
        project(&self.horiz_basis, &self.g1, x)
    }

    pub fn project_kernel(&self, x: &DVector<f64>) -> DVector<f64> {
        project(&self.ker_basis, &self.g1, x)
    }

    pub fn norm1(&self, x: &DVector<f64>) -> f64 {
        norm(&self.g1, x)
    }

    pub fn norm2(&self, w: &DVector<f64>) -> f64 {
        norm(&self.g2, w)
    }

    pub fn inner2(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        inner(&self.g2, a, b)
    }

    /// max |g₂(J hᵢ, J hⱼ) − δᵢⱼ| over the horizontal basis.
    pub fn isometry_residual(&self) -> f64 {
        crate::numcore::linalg::orthonormality_defect(&self.pushed_horiz, &self.g2)
    }

    /// Horizontal v with g₁(v, h) = g₂(w, J h) for every horizontal h.
    pub fn adjoint(&self, w: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.source_dim());
        for (h, jh) in self.horiz_basis.iter().zip(&self.pushed_horiz) {
            out.axpy(self.inner2(w, jh), h, 1.0);
        }
        out
    }

    /// Horizontal x with T_* x equal to the range part of `w`.
    pub fn horizontal_preimage(&self, w: &DVector<f64>) -> Result<DVector<f64>, Error> {
        let r = self.rank;
        let gram = DMatrix::from_fn(r, r, |i, j| self.inner2(&self.pushed_horiz[i], &self.pushed_horiz[j]));
        let rhs = DVector::from_fn(r, |i, _| self.inner2(w, &self.pushed_horiz[i]));
        let c = spd_solve(&gram, &rhs)?;
        let mut out = DVector::zeros(self.source_dim());
        for (ci, h) in c.iter().zip(&self.horiz_basis) {
            out.axpy(*ci, h, 1.0);
        }
        Ok(out)
    }

    /// Range component of `u` relative to its size; zero for normal vectors.
    pub fn normal_residual(&self, u: &DVector<f64>) -> f64 {
        self.norm2(&self.project_range(u)) / self.norm2(u).max(1.0)
    }

    fn check_normal(&self, u: &DVector<f64>) -> Result<bool, Error> {
        if self.normal_basis.is_empty() {
            if self.norm2(u) == 0.0 {
                return Ok(false);
            }
            return Err(Error::NoNormalSpace);
        }
        let residual = self.normal_residual(u);
        if residual > NORMAL_TOL {
            return Err(Error::NotNormal { residual });
        }
        Ok(true)
    }

    /// S_U T_* X, from g₂(S_U T_*X, J hⱼ) = g₂(U, (∇T_*)(X, hⱼ)).
    ///
    /// Only the horizontal part of `x` is used, since T_*X sees nothing else.
    pub fn shape_operator(&self, u: &DVector<f64>, x: &DVector<f64>) -> Result<DVector<f64>, Error> {
        if !self.check_normal(u)? {
            return Ok(DVector::zeros(self.target_dim()));
        }
        let xh = self.project_horizontal(x);
        let r = self.rank;
        let gram = DMatrix::from_fn(r, r, |i, j| self.inner2(&self.pushed_horiz[i], &self.pushed_horiz[j]));
        let rhs = DVector::from_fn(r, |j, _| self.inner2(u, &self.sff(&xh, &self.horiz_basis[j])));
        let c = spd_solve(&gram, &rhs)?;
        let mut out = DVector::zeros(self.target_dim());
        for (cj, jh) in c.iter().zip(&self.pushed_horiz) {
            out.axpy(*cj, jh, 1.0);
        }
        Ok(out)
    }

    /// S_U applied to a range vector `w`.
    pub fn shape_on_range(&self, u: &DVector<f64>, w: &DVector<f64>) -> Result<DVector<f64>, Error> {
        let x = self.horizontal_preimage(w)?;
        self.shape_operator(u, &x)
    }

    /// Uniform unit horizontal vector: Gaussian coefficients in the
    /// horizontal basis, normalized.
    pub fn random_unit_horizontal(&self, rng: &mut Rng) -> DVector<f64> {
        loop {
            let c = sampling::gaussian(rng, self.rank);
            let mut v = DVector::zeros(self.source_dim());
            for (ci, h) in c.iter().zip(&self.horiz_basis) {
                v.axpy(*ci, h, 1.0);
            }
            let nv = self.norm1(&v);
            if nv > 1e-12 {
                return v / nv;
            }
        }
    }

    /// Orthonormal horizontal pair (needs rank ≥ 2).
    pub fn random_orthonormal_pair(&self, rng: &mut Rng) -> Result<(DVector<f64>, DVector<f64>), Error> {
        self.random_orthonormal_frame(rng, 2).map(|mut v| {
            let y = v.pop().expect("two vectors");
            let x = v.pop().expect("two vectors");
            (x, y)
        })
    }

    /// `k` random g₁-orthonormal horizontal vectors.
    pub fn random_orthonormal_frame(&self, rng: &mut Rng, k: usize) -> Result<Vec<DVector<f64>>, Error> {
        if self.rank < k {
            return Err(Error::RankTooSmall {
                rank: self.rank,
                needed: k,
            });
        }
        loop {
            let draws: Vec<DVector<f64>> = (0..k).map(|_| self.random_unit_horizontal(rng)).collect();
            let frame = orthonormalize(&draws, &self.g1)?;
            if frame.len() == k {
                return Ok(frame);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannianCheck {
    pub isometry_residual: f64,
    pub riemannian: bool,
}

pub fn is_riemannian_at(t: &SmoothMap, p: &[f64], tol: f64) -> Result<RiemannianCheck, Error> {
    let residual = jet(t, p)?.isometry_residual();
    Ok(RiemannianCheck {
        isometry_residual: residual,
        riemannian: residual <= tol,
    })
}

pub fn second_fundamental_form(
    t: &SmoothMap,
    p: &[f64],
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<DVector<f64>, Error> {
    Ok(jet(t, p)?.sff(x, y))
}

/// max |g₂((∇T_*)(X₁, X₂), T_*X₃)| over seeded random unit horizontal triples.
pub fn check_normal_valued(t: &SmoothMap, p: &[f64], trials: usize, seed: u64) -> Result<f64, Error> {
    let jt = jet(t, p)?;
    let worst = crate::par::map_indexed(trials, |k| {
        let mut rng = sampling::stream(seed, k as u64);
        let x1 = jt.random_unit_horizontal(&mut rng);
        let x2 = jt.random_unit_horizontal(&mut rng);
        let x3 = jt.random_unit_horizontal(&mut rng);
        jt.inner2(&jt.sff(&x1, &x2), &jt.push(&x3)).abs()
    });
    Ok(worst.into_iter().fold(0.0, f64::max))
}

pub fn shape_operator(t: &SmoothMap, p: &[f64], u: &DVector<f64>, x: &DVector<f64>) -> Result<DVector<f64>, Error> {
    jet(t, p)?.shape_operator(u, x)
}

pub fn adjoint_pushforward(t: &SmoothMap, p: &[f64], w: &DVector<f64>) -> Result<DVector<f64>, Error> {
    Ok(jet(t, p)?.adjoint(w))
}
