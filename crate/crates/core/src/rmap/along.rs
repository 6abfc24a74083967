use nalgebra::DVector;
use serde::Serialize;

use super::jet::{jet_with_source, MapJet, NORMAL_TOL};
use super::SmoothMap;
use crate::manifold::{CurveContext, FrenetCurve};
use crate::numcore::stencil;
use crate::par;
use crate::Error;

/// Jets and source geometry at every sample of a source curve.
#[derive(Debug, Clone)]
pub struct MapCurveContext {
    pub curve: CurveContext,
    pub jets: Vec<MapJet>,
    /// T_*ξ at each sample.
    pub image_velocity: Vec<DVector<f64>>,
}

impl MapCurveContext {
    pub fn new(t: &SmoothMap, curve: CurveContext) -> Result<Self, Error> {
        let jets = par::try_map_indexed(curve.len(), |i| {
            jet_with_source(t, curve.positions[i].as_slice(), curve.geometry[i].clone())
        })?;
        let image_velocity = jets.iter().zip(&curve.velocity).map(|(jt, v)| jt.push(v)).collect();
        Ok(MapCurveContext {
            curve,
            jets,
            image_velocity,
        })
    }

    pub fn from_frenet(t: &SmoothMap, curve: &FrenetCurve) -> Result<Self, Error> {
        Self::new(t, curve.context(t.source())?)
    }

    pub fn len(&self) -> usize {
        self.jets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jets.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.curve.step
    }

    fn check(&self, field: &[DVector<f64>]) -> Result<(), Error> {
        if field.len() != self.len() {
            return Err(Error::GridMismatch {
                expected: self.len(),
                found: field.len(),
            });
        }
        Ok(())
    }

    /// Image positions T(u(s)).
    pub fn image_positions(&self) -> Vec<DVector<f64>> {
        self.jets.iter().map(|j| j.q.clone()).collect()
    }

    /// Pullback connection along T∘u: dWᵃ/ds + Γ²ᵃ_bc (T_*ξ)ᵇ Wᶜ.
    pub fn pullback_derivative(&self, field: &[DVector<f64>]) -> Result<Vec<DVector<f64>>, Error> {
        self.check(field)?;
        let mut d = stencil::derivative_vec(field, self.step())?;
        for (i, di) in d.iter_mut().enumerate() {
            let corr = self.jets[i]
                .gamma2
                .contract(self.image_velocity[i].as_slice(), field[i].as_slice());
            for (a, c) in corr.iter().enumerate() {
                di[a] += c;
            }
        }
        Ok(d)
    }

    /// ∇^{T⊥}: normal part of the pullback derivative of a normal field.
    pub fn normal_connection(&self, field: &[DVector<f64>]) -> Result<Vec<DVector<f64>>, Error> {
        self.check(field)?;
        let worst = self.normal_residual(field);
        if worst > NORMAL_TOL {
            return Err(Error::NotNormal { residual: worst });
        }
        let d = self.pullback_derivative(field)?;
        Ok(d.iter().zip(&self.jets).map(|(v, jt)| jt.project_normal(v)).collect())
    }

    /// Covariant derivative of a source field along the curve.
    pub fn source_derivative(&self, field: &[DVector<f64>]) -> Result<Vec<DVector<f64>>, Error> {
        self.curve.derivative(field)
    }

    pub fn push_field(&self, field: &[DVector<f64>]) -> Result<Vec<DVector<f64>>, Error> {
        self.check(field)?;
        Ok(field.iter().zip(&self.jets).map(|(x, jt)| jt.push(x)).collect())
    }

    pub fn sff_field(&self, x: &[DVector<f64>], y: &[DVector<f64>]) -> Result<Vec<DVector<f64>>, Error> {
        self.check(x)?;
        self.check(y)?;
        Ok((0..self.len()).map(|i| self.jets[i].sff(&x[i], &y[i])).collect())
    }

    /// Largest relative range component over the samples.
    pub fn normal_residual(&self, field: &[DVector<f64>]) -> f64 {
        field
            .iter()
            .zip(&self.jets)
            .map(|(u, jt)| jt.normal_residual(u))
            .fold(0.0, f64::max)
    }

    /// Largest g₁-norm of the kernel part of a source field.
    pub fn vertical_drift(&self, field: &[DVector<f64>]) -> Vec<f64> {
        field
            .iter()
            .zip(&self.jets)
            .map(|(x, jt)| jt.norm1(&jt.project_kernel(x)))
            .collect()
    }

    /// (∇̃_{X₁}∇T_*)(X₂, X₃) with X₁ the curve tangent:
    /// ∇^{T⊥}σ(X₂,X₃) − σ(∇¹X₂, X₃) − σ(X₂, ∇¹X₃).
    pub fn nabla_sff(&self, x2: &[DVector<f64>], x3: &[DVector<f64>]) -> Result<Vec<DVector<f64>>, Error> {
        let sigma = self.sff_field(x2, x3)?;
        // σ of horizontal fields is normal only for Riemannian maps, so take
        // the normal part of the pullback derivative without the precheck.
        let d = self.pullback_derivative(&sigma)?;
        let dx2 = self.source_derivative(x2)?;
        let dx3 = self.source_derivative(x3)?;
        Ok((0..self.len())
            .map(|i| {
                let jt = &self.jets[i];
                jt.project_normal(&d[i]) - jt.sff(&dx2[i], &x3[i]) - jt.sff(&x2[i], &dx3[i])
            })
            .collect())
    }

    /// Both sides of ⟨(∇̃_{X₁}∇T_*)(X₂,X₃), U⟩ = ⟨(∇̃_{X₁}S)_U T_*X₂, T_*X₃⟩.
    ///
    /// The right side expands as
    /// ⟨T_*(∇¹ *T_*(S_U T_*X₂)), T_*X₃⟩ − ⟨S_{∇⊥U} T_*X₂, T_*X₃⟩
    /// − ⟨S_U P∇^T T_*X₂, T_*X₃⟩.
    pub fn lemma21(&self, x2: &[DVector<f64>], x3: &[DVector<f64>], u: &[DVector<f64>]) -> Result<Lemma21, Error> {
        self.check(u)?;
        let n = self.len();
        let lhs_field = self.nabla_sff(x2, x3)?;
        let lhs: Vec<f64> = (0..n).map(|i| self.jets[i].inner2(&lhs_field[i], &u[i])).collect();

        let jx2 = self.push_field(x2)?;
        let jx3 = self.push_field(x3)?;
        let adj = par::try_map_indexed(n, |i| {
            let jt = &self.jets[i];
            Ok::<_, Error>(jt.adjoint(&jt.shape_operator(&u[i], &x2[i])?))
        })?;
        let d_adj = self.source_derivative(&adj)?;
        let du = self.normal_connection(u)?;
        let djx2 = self.pullback_derivative(&jx2)?;
        let rhs = par::try_map_indexed(n, |i| {
            let jt = &self.jets[i];
            let term1 = jt.inner2(&jt.push(&d_adj[i]), &jx3[i]);
            let term2 = jt.inner2(&jt.shape_operator(&du[i], &x2[i])?, &jx3[i]);
            let term3 = jt.inner2(&jt.shape_on_range(&u[i], &jt.project_range(&djx2[i]))?, &jx3[i]);
            Ok::<_, Error>(term1 - term2 - term3)
        })?;
        let residual = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        Ok(Lemma21 { lhs, rhs, residual })
    }

    /// Mean curvature field along the curve.
    pub fn mean_curvature_field(&self) -> Vec<DVector<f64>> {
        self.jets.iter().map(crate::isotropy::mean_curvature_of).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma21 {
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub residual: f64,
}

/// ∇^{T⊥}U along the image of a generated curve.
pub fn normal_connection_along(
    t: &SmoothMap,
    curve: &FrenetCurve,
    u: &[DVector<f64>],
) -> Result<Vec<DVector<f64>>, Error> {
    MapCurveContext::from_frenet(t, curve)?.normal_connection(u)
}

pub fn nabla_sff(
    t: &SmoothMap,
    curve: &FrenetCurve,
    x2: &[DVector<f64>],
    x3: &[DVector<f64>],
) -> Result<Vec<DVector<f64>>, Error> {
    MapCurveContext::from_frenet(t, curve)?.nabla_sff(x2, x3)
}

pub fn lemma21_residual(
    t: &SmoothMap,
    curve: &FrenetCurve,
    x2: &[DVector<f64>],
    x3: &[DVector<f64>],
    u: &[DVector<f64>],
) -> Result<f64, Error> {
    Ok(MapCurveContext::from_frenet(t, curve)?.lemma21(x2, x3, u)?.residual)
}
