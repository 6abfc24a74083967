use nalgebra::DVector;

use super::{ChartManifold, PointGeometry};
use crate::numcore::linalg::norm;
use crate::numcore::stencil::{self, MIN_SAMPLES};
use crate::par;
use crate::Error;

/// A sampled curve together with per-sample metric data, for repeated
/// covariant differentiation of fields along it.
#[derive(Debug, Clone)]
pub struct CurveContext {
    pub step: f64,
    pub positions: Vec<DVector<f64>>,
    /// u̇(s); from the caller when known exactly, else by stencil.
    pub velocity: Vec<DVector<f64>>,
    pub geometry: Vec<PointGeometry>,
}

impl CurveContext {
    pub fn new(
        m: &ChartManifold,
        positions: Vec<DVector<f64>>,
        step: f64,
        velocity: Option<Vec<DVector<f64>>>,
    ) -> Result<Self, Error> {
        if positions.len() < MIN_SAMPLES {
            return Err(Error::TooFewSamples {
                needed: MIN_SAMPLES,
                found: positions.len(),
            });
        }
        let velocity = match velocity {
            Some(v) => {
                check_grid(positions.len(), &v)?;
                v
            }
            None => stencil::derivative_vec(&positions, step)?,
        };
        let geometry = par::try_map_indexed(positions.len(), |i| m.geometry_at(positions[i].as_slice()))?;
        Ok(CurveContext {
            step,
            positions,
            velocity,
            geometry,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// (∇_{u̇}W)ᵏ = dWᵏ/ds + Γᵏᵢⱼ u̇ⁱ Wʲ.
    pub fn derivative(&self, field: &[DVector<f64>]) -> Result<Vec<DVector<f64>>, Error> {
        check_grid(self.len(), field)?;
        let mut d = stencil::derivative_vec(field, self.step)?;
        for (i, di) in d.iter_mut().enumerate() {
            let corr = self.geometry[i]
                .gamma
                .contract(self.velocity[i].as_slice(), field[i].as_slice());
            for (k, c) in corr.iter().enumerate() {
                di[k] += c;
            }
        }
        Ok(d)
    }

    pub fn norm_at(&self, i: usize, v: &DVector<f64>) -> f64 {
        norm(&self.geometry[i].g, v)
    }

    pub fn inner_at(&self, i: usize, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        crate::numcore::linalg::inner(&self.geometry[i].g, a, b)
    }

    /// Largest |‖u̇‖ − 1| over the samples.
    pub fn speed_defect(&self) -> f64 {
        (0..self.len())
            .map(|i| (self.norm_at(i, &self.velocity[i]) - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn check_grid(expected: usize, field: &[DVector<f64>]) -> Result<(), Error> {
    if field.len() != expected {
        return Err(Error::GridMismatch {
            expected,
            found: field.len(),
        });
    }
    Ok(())
}

/// Covariant derivative of `field` along the sampled path `positions`.
pub fn covariant_derivative_along(
    m: &ChartManifold,
    positions: &[DVector<f64>],
    field: &[DVector<f64>],
    step: f64,
) -> Result<Vec<DVector<f64>>, Error> {
    check_grid(positions.len(), field)?;
    CurveContext::new(m, positions.to_vec(), step, None)?.derivative(field)
}
