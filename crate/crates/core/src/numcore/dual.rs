//! Second-order forward-mode dual numbers.
//!
//! A [`Dual2`] carries a value together with its gradient and Hessian with
//! respect to a fixed set of active inputs. Constants carry empty derivative
//! storage and broadcast against variables of any dimension, which keeps
//! expression evaluation free of dimension bookkeeping.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use smallvec::{smallvec, SmallVec};
use thiserror::Error;

/// The primitive whose domain was violated during evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("sqrt of a negative value")]
    SqrtNegative,
    #[error("sqrt derivative is singular at zero")]
    SqrtSingular,
    #[error("log of a non-positive value")]
    LogNonPositive,
    #[error("division by zero")]
    DivisionByZero,
}

/// Numeric type usable by expression evaluation and the built-in formulas.
///
/// Implemented for plain `f64` and for [`Dual2`]; the same formula code
/// produces values, gradients and Hessians depending on the instantiation.
pub trait Scalar:
    Clone + fmt::Debug + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn from_f64(c: f64) -> Self;
    fn value(&self) -> f64;
    fn checked_div(self, rhs: Self) -> Result<Self, DomainError>;
    fn powi(self, n: i32) -> Result<Self, DomainError>;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn sqrt(self) -> Result<Self, DomainError>;
    fn ln(self) -> Result<Self, DomainError>;

    fn scale(self, c: f64) -> Self {
        self * Self::from_f64(c)
    }
}

impl Scalar for f64 {
    fn from_f64(c: f64) -> Self {
        c
    }

    fn value(&self) -> f64 {
        *self
    }

    fn checked_div(self, rhs: Self) -> Result<Self, DomainError> {
        if rhs == 0.0 {
            return Err(DomainError::DivisionByZero);
        }
        Ok(self / rhs)
    }

    fn powi(self, n: i32) -> Result<Self, DomainError> {
        if n < 0 && self == 0.0 {
            return Err(DomainError::DivisionByZero);
        }
        Ok(f64::powi(self, n))
    }

    fn sin(self) -> Self {
        f64::sin(self)
    }

    fn cos(self) -> Self {
        f64::cos(self)
    }

    fn exp(self) -> Self {
        f64::exp(self)
    }

    fn sqrt(self) -> Result<Self, DomainError> {
        if self < 0.0 {
            return Err(DomainError::SqrtNegative);
        }
        Ok(f64::sqrt(self))
    }

    fn ln(self) -> Result<Self, DomainError> {
        if self <= 0.0 {
            return Err(DomainError::LogNonPositive);
        }
        Ok(f64::ln(self))
    }
}

// Inline up to four active inputs; larger charts spill to the heap.
type Grad = SmallVec<[f64; 4]>;
type Hess = SmallVec<[f64; 16]>;

/// Value, gradient and (row-major, symmetric) Hessian of a scalar quantity.
#[derive(Clone, PartialEq)]
pub struct Dual2 {
    value: f64,
    grad: Grad,
    hess: Hess,
}

impl Dual2 {
    /// A constant: no derivative storage.
    pub fn constant(value: f64) -> Self {
        Dual2 {
            value,
            grad: Grad::new(),
            hess: Hess::new(),
        }
    }

    /// The `index`-th of `n` active inputs, seeded with a unit gradient.
    pub fn variable(value: f64, index: usize, n: usize) -> Self {
        assert!(index < n, "variable index {index} out of range for {n} inputs");
        let mut grad: Grad = smallvec![0.0; n];
        grad[index] = 1.0;
        Dual2 {
            value,
            grad,
            hess: smallvec![0.0; n * n],
        }
    }

    /// Seed every coordinate of `x` as an independent variable.
    pub fn seed(x: &[f64]) -> Vec<Dual2> {
        let n = x.len();
        x.iter().enumerate().map(|(i, &v)| Dual2::variable(v, i, n)).collect()
    }

    pub fn val(&self) -> f64 {
        self.value
    }

    /// Number of active inputs (0 for constants).
    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    /// Gradient padded to `n` entries (constants yield zeros).
    pub fn gradient(&self, n: usize) -> Vec<f64> {
        if self.grad.is_empty() {
            vec![0.0; n]
        } else {
            assert_eq!(self.grad.len(), n, "gradient dimension mismatch");
            self.grad.to_vec()
        }
    }

    /// Hessian entry (i, j); zero for constants.
    pub fn hess(&self, i: usize, j: usize) -> f64 {
        if self.hess.is_empty() {
            0.0
        } else {
            self.hess[i * self.grad.len() + j]
        }
    }

    pub fn grad(&self) -> &[f64] {
        &self.grad
    }

    /// Apply a scalar function given f(a), f'(a), f''(a).
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Dual2 {
        let n = self.grad.len();
        let grad: Grad = self.grad.iter().map(|g| f1 * g).collect();
        let mut hess: Hess = smallvec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let h = f1 * self.hess[i * n + j] + f2 * (self.grad[i] * self.grad[j]);
                hess[i * n + j] = h;
                hess[j * n + i] = h;
            }
        }
        Dual2 { value: f0, grad, hess }
    }

    fn common_dim(a: &Dual2, b: &Dual2) -> usize {
        match (a.grad.len(), b.grad.len()) {
            (0, n) | (n, 0) => n,
            (n, m) => {
                assert_eq!(n, m, "dual numbers over different input dimensions");
                n
            }
        }
    }

    fn g(&self, i: usize) -> f64 {
        if self.grad.is_empty() {
            0.0
        } else {
            self.grad[i]
        }
    }

    fn recip(&self) -> Result<Dual2, DomainError> {
        if self.value == 0.0 {
            return Err(DomainError::DivisionByZero);
        }
        let inv = 1.0 / self.value;
        Ok(self.chain(inv, -inv * inv, 2.0 * inv * inv * inv))
    }
}

impl fmt::Debug for Dual2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dual2")
            .field("value", &self.value)
            .field("grad", &self.grad)
            .field("hess", &self.hess)
            .finish()
    }
}

impl Add for Dual2 {
    type Output = Dual2;

    fn add(self, rhs: Dual2) -> Dual2 {
        let (mut acc, other) = if self.grad.is_empty() { (rhs, self) } else { (self, rhs) };
        acc.value += other.value;
        if !other.grad.is_empty() {
            Dual2::common_dim(&acc, &other);
            acc.grad.iter_mut().zip(&other.grad).for_each(|(a, b)| *a += b);
            acc.hess.iter_mut().zip(&other.hess).for_each(|(a, b)| *a += b);
        }
        acc
    }
}

impl Sub for Dual2 {
    type Output = Dual2;

    fn sub(self, rhs: Dual2) -> Dual2 {
        self + (-rhs)
    }
}

impl Neg for Dual2 {
    type Output = Dual2;

    fn neg(mut self) -> Dual2 {
        self.value = -self.value;
        self.grad.iter_mut().for_each(|g| *g = -*g);
        self.hess.iter_mut().for_each(|h| *h = -*h);
        self
    }
}

impl Mul for Dual2 {
    type Output = Dual2;

    fn mul(self, rhs: Dual2) -> Dual2 {
        let n = Dual2::common_dim(&self, &rhs);
        let (a, b) = (self.value, rhs.value);
        let grad = (0..n).map(|i| a * rhs.g(i) + b * self.g(i)).collect();
        let mut hess: Hess = smallvec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let h = (a * rhs.hess(i, j) + b * self.hess(i, j)) + (self.g(i) * rhs.g(j) + rhs.g(i) * self.g(j));
                hess[i * n + j] = h;
                hess[j * n + i] = h;
            }
        }
        Dual2 {
            value: a * b,
            grad,
            hess,
        }
    }
}

impl Scalar for Dual2 {
    fn from_f64(c: f64) -> Self {
        Dual2::constant(c)
    }

    fn value(&self) -> f64 {
        self.value
    }

    fn checked_div(self, rhs: Self) -> Result<Self, DomainError> {
        Ok(self * rhs.recip()?)
    }

    fn powi(self, n: i32) -> Result<Self, DomainError> {
        let a = self.value;
        if n < 0 && a == 0.0 {
            return Err(DomainError::DivisionByZero);
        }
        Ok(match n {
            0 => Dual2::constant(1.0),
            1 => self,
            _ => {
                let nf = f64::from(n);
                let f1 = nf * a.powi(n - 1);
                let f2 = nf * (nf - 1.0) * a.powi(n - 2);
                self.chain(a.powi(n), f1, f2)
            }
        })
    }

    fn sin(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    fn cos(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    fn sqrt(self) -> Result<Self, DomainError> {
        let a = self.value;
        if a < 0.0 {
            return Err(DomainError::SqrtNegative);
        }
        if a == 0.0 {
            if self.grad.is_empty() {
                return Ok(Dual2::constant(0.0));
            }
            return Err(DomainError::SqrtSingular);
        }
        let r = a.sqrt();
        Ok(self.chain(r, 0.5 / r, -0.25 / (a * r)))
    }

    fn ln(self) -> Result<Self, DomainError> {
        let a = self.value;
        if a <= 0.0 {
            return Err(DomainError::LogNonPositive);
        }
        Ok(self.chain(a.ln(), 1.0 / a, -1.0 / (a * a)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_symmetric(d: &Dual2) {
        let n = d.dim();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(d.hess(i, j).to_bits(), d.hess(j, i).to_bits());
            }
        }
    }

    #[test]
    fn product_rule_and_hessian() {
        let x = Dual2::seed(&[3.0, 4.0]);
        let p = x[0].clone() * x[1].clone();
        assert_eq!(p.val(), 12.0);
        assert_eq!(p.grad(), &[4.0, 3.0]);
        assert_eq!(p.hess(0, 1), 1.0);
        assert_eq!(p.hess(0, 0), 0.0);
    }

    #[test]
    fn sqrt_chain_rule() {
        let x = Dual2::variable(4.0, 0, 1);
        let r = x.sqrt().unwrap();
        assert_eq!(r.val(), 2.0);
        assert_eq!(r.grad(), &[0.25]);
        assert!((r.hess(0, 0) + 1.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn constants_broadcast() {
        let x = Dual2::seed(&[2.0, -1.0]);
        let y = Dual2::constant(3.0) * x[0].clone() + Dual2::constant(1.0);
        assert_eq!(y.val(), 7.0);
        assert_eq!(y.gradient(2), vec![3.0, 0.0]);
    }

    #[test]
    fn domain_errors() {
        assert_eq!(
            Dual2::variable(-1.0, 0, 1).sqrt().unwrap_err(),
            DomainError::SqrtNegative
        );
        assert_eq!(
            Dual2::variable(0.0, 0, 1).ln().unwrap_err(),
            DomainError::LogNonPositive
        );
        assert_eq!(
            Dual2::constant(1.0)
                .checked_div(Dual2::variable(0.0, 0, 1))
                .unwrap_err(),
            DomainError::DivisionByZero
        );
        assert_eq!(
            Dual2::variable(0.0, 0, 1).powi(-2).unwrap_err(),
            DomainError::DivisionByZero
        );
    }

    #[test]
    fn composite_hessian_is_exactly_symmetric() {
        let x = Dual2::seed(&[0.3, 1.7, -0.4]);
        let a = x[0].clone() * x[1].clone().sin() + x[2].clone().exp();
        let b = (x[1].clone() * x[2].clone()).cos().powi(3).unwrap();
        let c = (a.clone() * b.clone()).checked_div(x[1].clone()).unwrap();
        assert_symmetric(&a);
        assert_symmetric(&b);
        assert_symmetric(&c);
    }

    #[test]
    fn powi_at_zero_is_finite() {
        let x = Dual2::variable(0.0, 0, 1);
        let sq = x.clone().powi(2).unwrap();
        assert_eq!(sq.grad(), &[0.0]);
        assert_eq!(sq.hess(0, 0), 2.0);
        let cube = x.powi(3).unwrap();
        assert_eq!(cube.hess(0, 0), 0.0);
    }
}
