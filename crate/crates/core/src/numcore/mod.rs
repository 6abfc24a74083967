//! Numerical kernels: dual-number differentiation, finite-difference
//! references, dense linear algebra, stencils and RK4.

pub mod diff;
pub mod dual;
pub mod fd;
pub mod linalg;
pub mod ode;
pub mod stencil;
pub mod tensor;

pub use diff::{evaluate, hessian_tensor, jacobian, jet2, Jet2, VectorFunction};
pub use dual::{DomainError, Dual2, Scalar};
pub use linalg::{orthonormalize, RANK_TOL_FACTOR};
pub use ode::{rk4_integrate, rk4_integrate_checked, OdeState};
pub use tensor::Tensor3;
