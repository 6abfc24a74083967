//! Fourth-order finite-difference derivatives of uniformly sampled data.

use nalgebra::DVector;

use crate::Error;

pub const MIN_SAMPLES: usize = 5;

/// Derivative weights (numerators over 12h) and first sample index for
/// sample `i` of `n`.
fn weights(i: usize, n: usize) -> ([f64; 5], usize) {
    if i >= 2 && i + 2 < n {
        ([1.0, -8.0, 0.0, 8.0, -1.0], i - 2)
    } else if i == 0 {
        ([-25.0, 48.0, -36.0, 16.0, -3.0], 0)
    } else if i == 1 {
        ([-3.0, -10.0, 18.0, -6.0, 1.0], 0)
    } else if i == n - 1 {
        ([3.0, -16.0, 36.0, -48.0, 25.0], n - 5)
    } else {
        ([-1.0, 6.0, -18.0, 10.0, 3.0], n - 5)
    }
}

/// Samples read by the derivative at sample `i` of `n`.
pub fn support(i: usize, n: usize) -> std::ops::Range<usize> {
    let (_, start) = weights(i, n);
    start..start + 5
}

/// d/ds of scalar samples on a uniform grid with spacing `h`.
pub fn derivative(values: &[f64], h: f64) -> Result<Vec<f64>, Error> {
    let n = values.len();
    if n < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_SAMPLES,
            found: n,
        });
    }
    Ok((0..n)
        .map(|i| {
            let (w, start) = weights(i, n);
            let acc: f64 = w.iter().enumerate().map(|(k, wk)| wk * values[start + k]).sum();
            acc / (12.0 * h)
        })
        .collect())
}

/// Component-wise d/ds of vector samples.
pub fn derivative_vec(values: &[DVector<f64>], h: f64) -> Result<Vec<DVector<f64>>, Error> {
    let n = values.len();
    if n < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_SAMPLES,
            found: n,
        });
    }
    let dim = values[0].len();
    Ok((0..n)
        .map(|i| {
            let (w, start) = weights(i, n);
            let mut acc = DVector::zeros(dim);
            for (k, wk) in w.iter().enumerate() {
                if *wk != 0.0 {
                    acc.axpy(*wk, &values[start + k], 1.0);
                }
            }
            acc / (12.0 * h)
        })
        .collect())
}
