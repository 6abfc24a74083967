use super::{EvalError, Expr, Func};
use crate::numcore::Scalar;

impl Expr {
    /// Evaluate over plain reals or dual numbers.
    ///
    /// Domain failures name the smallest failing sub-expression in canonical
    /// form.
    pub fn eval<S: Scalar>(&self, args: &[S]) -> Result<S, EvalError> {
        let need = self.min_arity();
        if args.len() < need {
            return Err(EvalError::Arity {
                expected: need,
                found: args.len(),
            });
        }
        self.eval_unchecked(args)
    }

    fn eval_unchecked<S: Scalar>(&self, args: &[S]) -> Result<S, EvalError> {
        let fail = |p| EvalError::domain(p, self.to_string());
        Ok(match self {
            Expr::Const(c) => S::from_f64(*c),
            Expr::Var(i) => args[*i].clone(),
            Expr::Neg(a) => -a.eval_unchecked(args)?,
            Expr::Add(a, b) => a.eval_unchecked(args)? + b.eval_unchecked(args)?,
            Expr::Sub(a, b) => a.eval_unchecked(args)? - b.eval_unchecked(args)?,
            Expr::Mul(a, b) => a.eval_unchecked(args)? * b.eval_unchecked(args)?,
            Expr::Div(a, b) => {
                let num = a.eval_unchecked(args)?;
                let den = b.eval_unchecked(args)?;
                num.checked_div(den).map_err(fail)?
            }
            Expr::Pow(a, n) => a.eval_unchecked(args)?.powi(*n).map_err(fail)?,
            Expr::Call(func, a) => {
                let v = a.eval_unchecked(args)?;
                match func {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Sqrt => v.sqrt().map_err(fail)?,
                    Func::Log => v.ln().map_err(fail)?,
                }
            }
        })
    }
}
