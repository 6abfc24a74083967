//! Central finite differences over plain `f64` evaluation.
//!
//! These never touch the dual-number path and serve as the reference that
//! the automatic derivatives are checked against.

use nalgebra::DMatrix;

use super::diff::VectorFunction;
use super::tensor::Tensor3;
use crate::exprlang::EvalError;

pub const FIRST_ORDER_STEP: f64 = 1e-5;
pub const SECOND_ORDER_STEP: f64 = 1e-4;

fn eval_at<F: VectorFunction + ?Sized>(f: &F, x: &[f64]) -> Result<Vec<f64>, EvalError> {
    f.eval::<f64>(x)
}

pub fn jacobian<F: VectorFunction + ?Sized>(f: &F, x: &[f64], h: f64) -> Result<DMatrix<f64>, EvalError> {
    let m = x.len();
    let n = f.output_dim();
    let mut out = DMatrix::zeros(n, m);
    let mut xp = x.to_vec();
    for i in 0..m {
        xp[i] = x[i] + h;
        let fp = eval_at(f, &xp)?;
        xp[i] = x[i] - h;
        let fm = eval_at(f, &xp)?;
        xp[i] = x[i];
        for a in 0..n {
            out[(a, i)] = (fp[a] - fm[a]) / (2.0 * h);
        }
    }
    Ok(out)
}

pub fn hessian_tensor<F: VectorFunction + ?Sized>(f: &F, x: &[f64], h: f64) -> Result<Tensor3, EvalError> {
    let m = x.len();
    let n = f.output_dim();
    let mut out = Tensor3::zeros(n, m, m);
    let f0 = eval_at(f, x)?;
    let mut xp = x.to_vec();
    for i in 0..m {
        for j in i..m {
            let vals = if i == j {
                xp[i] = x[i] + h;
                let fp = eval_at(f, &xp)?;
                xp[i] = x[i] - h;
                let fm = eval_at(f, &xp)?;
                xp[i] = x[i];
                (0..n)
                    .map(|a| (fp[a] - 2.0 * f0[a] + fm[a]) / (h * h))
                    .collect::<Vec<_>>()
            } else {
                let mut corner = |si: f64, sj: f64| {
                    xp[i] = x[i] + si * h;
                    xp[j] = x[j] + sj * h;
                    let r = eval_at(f, &xp);
                    xp[i] = x[i];
                    xp[j] = x[j];
                    r
                };
                let pp = corner(1.0, 1.0)?;
                let pm = corner(1.0, -1.0)?;
                let mp = corner(-1.0, 1.0)?;
                let mm = corner(-1.0, -1.0)?;
                (0..n)
                    .map(|a| (pp[a] - pm[a] - mp[a] + mm[a]) / (4.0 * h * h))
                    .collect()
            };
            for (a, v) in vals.into_iter().enumerate() {
                out.set(a, i, j, v);
                out.set(a, j, i, v);
            }
        }
    }
    Ok(out)
}

/// Largest entrywise discrepancy `|a - b| / max(1, |b|)`.
pub fn max_relative_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / y.abs().max(1.0))
        .fold(0.0, f64::max)
}
