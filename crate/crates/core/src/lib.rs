//! Chart-based numerics for smooth maps between Riemannian manifolds.
//!
//! The crate computes the second fundamental form of a map, its shape
//! operator and isotropy invariants, integrates Frenet curves (circles and
//! helices) on the source manifold and checks how curvature is transported
//! to the target. Everything works in a single coordinate chart.
//!
//! Modules, bottom-up:
//! - [`numcore`]: dual numbers, finite differences, linear algebra, RK4.
//! - [`exprlang`]: the expression language used by scenario files.
//! - [`manifold`]: metrics, Christoffel symbols, Frenet curves.
//! - [`rmap`]: smooth maps, jets, second fundamental form, shape operator.
//! - [`isotropy`]: λ, isotropy and umbilicity diagnostics, composition.
//! - [`transport`]: image curvature and circle/helix transport checks.
//! - [`scenario`]: scenario files, registry, run reports.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exprlang;
pub mod isotropy;
pub mod manifold;
pub mod numcore;
pub mod par;
pub mod rmap;
pub mod sampling;
pub mod scenario;
pub mod transport;

pub use error::Error;
