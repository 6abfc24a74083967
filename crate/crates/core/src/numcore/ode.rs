use serde::{Deserialize, Serialize};

use crate::Error;

/// Flattened ODE state at arc-length parameter `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeState {
    pub s: f64,
    pub y: Vec<f64>,
}

impl OdeState {
    pub fn new(s: f64, y: Vec<f64>) -> Self {
        OdeState { s, y }
    }
}

fn axpy(y: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    y.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

/// One classical Runge–Kutta step.
pub fn rk4_step<F>(field: &F, state: &OdeState, step: f64) -> Result<OdeState, Error>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>, Error>,
{
    let s = state.s;
    let y = &state.y;
    let k1 = field(s, y)?;
    let k2 = field(s + 0.5 * step, &axpy(y, 0.5 * step, &k1))?;
    let k3 = field(s + 0.5 * step, &axpy(y, 0.5 * step, &k2))?;
    let k4 = field(s + step, &axpy(y, step, &k3))?;
    let next: Vec<f64> = (0..y.len())
        .map(|i| y[i] + step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    Ok(OdeState::new(s + step, next))
}

/// Fixed-step RK4; returns `n_steps + 1` states including `y0`.
///
/// `check` runs on every new state and may abort the integration (used to
/// detect chart exits).
pub fn rk4_integrate_checked<F, C>(
    field: F,
    y0: OdeState,
    step: f64,
    n_steps: usize,
    mut check: C,
) -> Result<Vec<OdeState>, Error>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>, Error>,
    C: FnMut(&OdeState) -> Result<(), Error>,
{
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "step",
            reason: format!("must be positive and finite, got {step}"),
        });
    }
    if y0.y.iter().any(|v| !v.is_finite()) {
        return Err(Error::IntegrationBlowup { last_s: y0.s });
    }
    let s0 = y0.s;
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(y0);
    for k in 0..n_steps {
        let prev = out.last().expect("non-empty");
        let mut next = rk4_step(&field, prev, step)?;
        if next.y.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationBlowup { last_s: prev.s });
        }
        // Exact grid: s_k = s0 + k h, no accumulated round-off.
        next.s = s0 + (k + 1) as f64 * step;
        check(&next)?;
        out.push(next);
    }
    Ok(out)
}

pub fn rk4_integrate<F>(field: F, y0: OdeState, step: f64, n_steps: usize) -> Result<Vec<OdeState>, Error>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>, Error>,
{
    rk4_integrate_checked(field, y0, step, n_steps, |_| Ok(()))
}
