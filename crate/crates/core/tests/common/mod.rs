#![allow(dead_code)]

use nalgebra::DVector;
use rand::Rng as _;
use riemap_core::exprlang::parse;
use riemap_core::manifold::{ChartManifold, Interval};
use riemap_core::rmap::SmoothMap;
use riemap_core::sampling;
pub use riemap_core::sampling::Rng;

pub fn quadric() -> SmoothMap {
    let comps: Vec<_> = ["x1", "x2", "x1^2"].iter().map(|s| parse(s, 2).unwrap()).collect();
    let src = ChartManifold::pullback(2, comps.clone(), vec![Interval::REAL_LINE; 2]).unwrap();
    SmoothMap::custom(src, ChartManifold::euclidean(3), comps)
        .unwrap()
        .with_name("quadric")
}

/// Every map the tool ships, Riemannian or not.
pub fn builtin_maps() -> Vec<SmoothMap> {
    vec![
        SmoothMap::identity(2),
        SmoothMap::identity(3),
        SmoothMap::sphere_immersion(1.0),
        SmoothMap::sphere_immersion(2.0),
        SmoothMap::sphere_immersion(0.5),
        SmoothMap::hypersphere_immersion(1.0, 3),
        SmoothMap::projection(3, 2).unwrap(),
        SmoothMap::scaling(2.0, 2),
        SmoothMap::paper_example(),
        quadric(),
    ]
}

pub fn riemannian_builtins() -> Vec<SmoothMap> {
    builtin_maps()
        .into_iter()
        .filter(|m| !m.name().starts_with("scaling") && m.name() != "paper_example")
        .collect()
}

pub fn rng(seed: u64, index: u64) -> Rng {
    sampling::stream(seed, index)
}

/// A point well inside the chart: bounded coordinates stay 0.1 from their
/// ends, unbounded ones are drawn from [-2, 2].
pub fn random_point(m: &ChartManifold, rng: &mut Rng) -> Vec<f64> {
    m.domain()
        .iter()
        .map(|iv| {
            let (lo, hi) = if iv.lo.is_finite() && iv.hi.is_finite() {
                (iv.lo + 0.1, iv.hi - 0.1)
            } else {
                (-2.0, 2.0)
            };
            rng.random_range(lo..hi)
        })
        .collect()
}

pub fn random_vector(n: usize, rng: &mut Rng) -> DVector<f64> {
    DVector::from_iterator(n, (0..n).map(|_| rng.random_range(-1.0..1.0)))
}

pub fn e(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}
