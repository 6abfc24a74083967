use nalgebra::{DMatrix, DVector};

use crate::Error;

/// Relative threshold for dropping dependent vectors and deciding rank.
pub const RANK_TOL_FACTOR: f64 = 1e-8;

#[inline]
pub fn inner(g: &DMatrix<f64>, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let n = x.len();
    let mut acc = 0.0;
    for i in 0..n {
        if x[i] == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for j in 0..n {
            row += g[(i, j)] * y[j];
        }
        acc += x[i] * row;
    }
    acc
}

#[inline]
pub fn norm(g: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    inner(g, x, x).max(0.0).sqrt()
}

/// Gram–Schmidt under the inner product with Gram matrix `g`.
///
/// Vectors whose residual norm after projection falls below
/// `RANK_TOL_FACTOR` times the largest input norm are dropped. Each vector is
/// projected twice so the output is orthonormal to round-off.
pub fn orthonormalize(vectors: &[DVector<f64>], g: &DMatrix<f64>) -> Result<Vec<DVector<f64>>, Error> {
    let mut scale: f64 = 0.0;
    for v in vectors {
        let q = inner(g, v, v);
        if q < 0.0 {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: q });
        }
        scale = scale.max(q.sqrt());
    }
    let tol = RANK_TOL_FACTOR * scale;
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = inner(g, b, &w);
                w.axpy(-c, b, 1.0);
            }
        }
        let q = inner(g, &w, &w);
        if q < 0.0 {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: q });
        }
        let nrm = q.sqrt();
        if nrm < tol || nrm == 0.0 {
            continue;
        }
        basis.push(w / nrm);
    }
    Ok(basis)
}

/// Extend an orthonormal `basis` to the whole space, returning only the new
/// vectors (the orthogonal complement).
pub fn complement(basis: &[DVector<f64>], g: &DMatrix<f64>) -> Result<Vec<DVector<f64>>, Error> {
    let n = g.nrows();
    let mut all: Vec<DVector<f64>> = basis.to_vec();
    all.extend((0..n).map(|i| {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        e
    }));
    let full = orthonormalize(&all, g)?;
    let k = basis.len();
    Ok(full.into_iter().skip(k).collect())
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(g: &DMatrix<f64>) -> f64 {
    match g.nrows() {
        0 => f64::INFINITY,
        1 => g[(0, 0)],
        2 => {
            let (a, b, d) = (g[(0, 0)], 0.5 * (g[(0, 1)] + g[(1, 0)]), g[(1, 1)]);
            let mean = 0.5 * (a + d);
            let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
            mean - rad
        }
        n if (0..n).all(|i| (0..n).all(|j| i == j || g[(i, j)] == 0.0)) => g.diagonal().min(),
        _ => g.clone().symmetric_eigenvalues().min(),
    }
}

/// Solve `a x = b` for symmetric positive definite `a`.
pub fn spd_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>, Error> {
    let chol = a.clone().cholesky().ok_or_else(|| Error::NotPositiveDefinite {
        min_eigenvalue: min_eigenvalue(a),
    })?;
    Ok(chol.solve(b))
}

/// Least-squares solution of `a x ≈ b` via SVD.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0_f64, |m, s| m.max(*s));
    svd.solve(b, RANK_TOL_FACTOR * smax.max(f64::MIN_POSITIVE))
        .expect("svd computed with both factors")
}

/// Split of the source space induced by a linear map between inner-product
/// spaces.
#[derive(Debug, Clone)]
pub struct MetricSvd {
    /// g_src-orthonormal vectors spanning the orthogonal complement of the kernel.
    pub row_space: Vec<DVector<f64>>,
    /// g_src-orthonormal kernel vectors.
    pub kernel: Vec<DVector<f64>>,
    /// Singular values of the map relative to the two inner products, descending.
    pub singular_values: Vec<f64>,
}

/// Kernel and its complement for `j: (R^m, g_src) -> (R^n, g_dst)`.
///
/// Works in orthonormal coordinates `A = L_dst^T J L_src^{-T}` where
/// `g = L L^T`, so singular values are those of the map between the inner
/// product spaces. Rank is decided against `RANK_TOL_FACTOR` times the
/// largest singular value.
pub fn metric_svd(j: &DMatrix<f64>, g_src: &DMatrix<f64>, g_dst: &DMatrix<f64>) -> Result<MetricSvd, Error> {
    let m = j.ncols();
    let l_src = g_src
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite {
            min_eigenvalue: min_eigenvalue(g_src),
        })?
        .l();
    let l_dst = g_dst
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite {
            min_eigenvalue: min_eigenvalue(g_dst),
        })?
        .l();
    // X = L_src^{-T}, i.e. solve L_src^T X = I.
    let x = l_src
        .transpose()
        .solve_upper_triangular(&DMatrix::identity(m, m))
        .expect("cholesky factor is nonsingular");
    let a = l_dst.transpose() * j * &x;
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&p, &q| svd.singular_values[q].total_cmp(&svd.singular_values[p]));
    let sigma: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let smax = sigma.first().copied().unwrap_or(0.0);
    let tol = RANK_TOL_FACTOR * smax;
    let rank = if smax == 0.0 {
        0
    } else {
        sigma.iter().filter(|&&s| s > tol).count()
    };
    let row_space_raw: Vec<DVector<f64>> = order[..rank].iter().map(|&k| &x * v_t.row(k).transpose()).collect();
    let row_space = orthonormalize(&row_space_raw, g_src)?;
    let kernel = complement(&row_space, g_src)?;
    Ok(MetricSvd {
        row_space,
        kernel,
        singular_values: sigma,
    })
}

/// Largest |g(v_i, v_j) - δ_ij| over a family of vectors.
pub fn orthonormality_defect(vectors: &[DVector<f64>], g: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((inner(g, a, b) - target).abs());
        }
    }
    worst
}
