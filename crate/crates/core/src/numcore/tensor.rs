use serde::{Deserialize, Serialize};

/// Dense rank-3 tensor indexed (a, i, j), row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor3 {
    dims: [usize; 3],
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(d0: usize, d1: usize, d2: usize) -> Self {
        Tensor3 {
            dims: [d0, d1, d2],
            data: vec![0.0; d0 * d1 * d2],
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    #[inline]
    fn offset(&self, a: usize, i: usize, j: usize) -> usize {
        debug_assert!(a < self.dims[0] && i < self.dims[1] && j < self.dims[2]);
        (a * self.dims[1] + i) * self.dims[2] + j
    }

    #[inline]
    pub fn get(&self, a: usize, i: usize, j: usize) -> f64 {
        self.data[self.offset(a, i, j)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, i: usize, j: usize, v: f64) {
        let k = self.offset(a, i, j);
        self.data[k] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Contract the last two indices against `x` and `y`: out^a = T^a_ij x^i y^j.
    pub fn contract(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let [d0, d1, d2] = self.dims;
        debug_assert_eq!(x.len(), d1);
        debug_assert_eq!(y.len(), d2);
        (0..d0)
            .map(|a| {
                let mut acc = 0.0;
                for (i, &xi) in x.iter().enumerate() {
                    if xi == 0.0 {
                        continue;
                    }
                    let row = &self.data[(a * d1 + i) * d2..(a * d1 + i + 1) * d2];
                    let dot: f64 = row.iter().zip(y).map(|(t, v)| t * v).sum();
                    acc += xi * dot;
                }
                acc
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
