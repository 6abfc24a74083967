use nalgebra::{DMatrix, DVector};

use super::dual::{Dual2, Scalar};
use super::tensor::Tensor3;
use crate::exprlang::EvalError;

/// A vector-valued function of several variables that can be evaluated over
/// any [`Scalar`].
pub trait VectorFunction: Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>, EvalError>;
}

/// Values, first and second derivatives from a single dual evaluation.
#[derive(Debug, Clone)]
pub struct Jet2 {
    pub value: DVector<f64>,
    pub jacobian: DMatrix<f64>,
    pub hessian: Tensor3,
}

pub fn evaluate<F: VectorFunction + ?Sized>(f: &F, x: &[f64]) -> Result<DVector<f64>, EvalError> {
    Ok(DVector::from_vec(f.eval(x)?))
}

pub fn jet2<F: VectorFunction + ?Sized>(f: &F, x: &[f64]) -> Result<Jet2, EvalError> {
    let m = x.len();
    let out = f.eval(&Dual2::seed(x))?;
    let n = out.len();
    let mut jacobian = DMatrix::zeros(n, m);
    let mut hessian = Tensor3::zeros(n, m, m);
    for (a, d) in out.iter().enumerate() {
        let g = d.gradient(m);
        for i in 0..m {
            jacobian[(a, i)] = g[i];
            for j in 0..m {
                hessian.set(a, i, j, d.hess(i, j));
            }
        }
    }
    Ok(Jet2 {
        value: DVector::from_iterator(n, out.iter().map(Dual2::val)),
        jacobian,
        hessian,
    })
}

/// Entry (a, i) is the partial derivative of output a with respect to input i.
pub fn jacobian<F: VectorFunction + ?Sized>(f: &F, x: &[f64]) -> Result<DMatrix<f64>, EvalError> {
    Ok(jet2(f, x)?.jacobian)
}

/// Entry (a, i, j) is the second partial of output a in inputs i and j.
pub fn hessian_tensor<F: VectorFunction + ?Sized>(f: &F, x: &[f64]) -> Result<Tensor3, EvalError> {
    Ok(jet2(f, x)?.hessian)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::fd;

    struct Poly;

    impl VectorFunction for Poly {
        fn input_dim(&self) -> usize {
            2
        }
        fn output_dim(&self) -> usize {
            2
        }
        fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>, EvalError> {
            let (a, b) = (x[0].clone(), x[1].clone());
            Ok(vec![a.clone() * a.clone(), S::from_f64(2.0) * a * b])
        }
    }

    struct Id(usize);

    impl VectorFunction for Id {
        fn input_dim(&self) -> usize {
            self.0
        }
        fn output_dim(&self) -> usize {
            self.0
        }
        fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>, EvalError> {
            Ok(x.to_vec())
        }
    }

    struct Bilinear;

    impl VectorFunction for Bilinear {
        fn input_dim(&self) -> usize {
            2
        }
        fn output_dim(&self) -> usize {
            1
        }
        fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>, EvalError> {
            Ok(vec![x[0].clone() * x[1].clone()])
        }
    }

    #[test]
    fn identity_jacobian_and_zero_hessian() {
        let j = jacobian(&Id(2), &[3.0, 4.0]).unwrap();
        assert_eq!(j, DMatrix::identity(2, 2));
        let h = hessian_tensor(&Id(2), &[3.0, 4.0]).unwrap();
        assert!(h.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn polynomial_jacobian_matches_hand_and_fd() {
        let j = jacobian(&Poly, &[1.0, 0.0]).unwrap();
        assert_eq!(j, DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]));
        let fdj = fd::jacobian(&Poly, &[1.0, 0.0], 1e-5).unwrap();
        assert!((j - fdj).amax() < 1e-9);
    }

    #[test]
    fn bilinear_hessian() {
        let h = hessian_tensor(&Bilinear, &[0.7, -2.0]).unwrap();
        assert_eq!(h.get(0, 0, 1), 1.0);
        assert_eq!(h.get(0, 1, 0), 1.0);
        assert_eq!(h.get(0, 0, 0), 0.0);
        assert_eq!(h.get(0, 1, 1), 0.0);
    }
}
