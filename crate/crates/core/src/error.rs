use thiserror::Error;

use crate::exprlang::EvalError;

/// Failures of the geometric computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("metric is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("integration produced a non-finite state after s = {last_s}")]
    IntegrationBlowup { last_s: f64 },
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("sample grids differ: expected {expected} samples, found {found}")]
    GridMismatch { expected: usize, found: usize },
    #[error("need at least {needed} samples, found {found}")]
    TooFewSamples { needed: usize, found: usize },
    #[error("initial frame is not orthonormal (deviation {deviation:e})")]
    FrameNotOrthonormal { deviation: f64 },
    #[error("curve left the chart domain at s = {s} (coordinate {coordinate})")]
    LeftChart { s: f64, coordinate: usize },
    #[error("point {point:?} lies outside the chart domain")]
    OutsideDomain { point: Vec<f64> },
    #[error("curve is not unit speed (deviation {deviation:e})")]
    NotUnitSpeed { deviation: f64 },
    #[error("map has rank 0 at {point:?} (locally constant)")]
    Degenerate { point: Vec<f64> },
    #[error("rank {rank} is below the {needed} required")]
    RankTooSmall { rank: usize, needed: usize },
    #[error("vector is not normal to the range (residual {residual:e})")]
    NotNormal { residual: f64 },
    #[error("the map has no normal directions here")]
    NoNormalSpace,
    #[error("vector is not horizontal (vertical component {residual:e})")]
    NotHorizontal { residual: f64 },
    #[error("vector is not unit length (norm {norm})")]
    NotUnit { norm: f64 },
    #[error("{what}: expected dimension {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("charts do not match: {0}")]
    ChartMismatch(String),
}
