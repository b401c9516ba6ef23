//! Per-window agent-pair similarity: cosine of window feature vectors,
//! max-normalized Euclidean distances, and their combination into the
//! dissimilarity matrix consumed by the clustering stage.

use crate::error::{Error, Result};
use crate::trajectory::WindowSlice;

/// Dense symmetric `n x n` matrix of f64, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().cloned().fold(0.0, f64::max)
    }
}

/// The per-window adjacency pair: trajectory cosine similarity and
/// max-normalized pairwise distance.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityPair {
    pub cosine: SquareMatrix,
    pub distance: SquareMatrix,
}

/// Pairwise dissimilarity in `[0, 1]`, symmetric with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    values: SquareMatrix,
}

impl DissimilarityMatrix {
    /// Validate and wrap an externally built matrix.
    pub fn from_matrix(values: SquareMatrix) -> Result<Self> {
        let n = values.n();
        for i in 0..n {
            if values.get(i, i) != 0.0 {
                return Err(Error::Invalid(format!(
                    "dissimilarity diagonal must be zero, got {} at {i}",
                    values.get(i, i)
                )));
            }
            for j in 0..n {
                let v = values.get(i, j);
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Invalid(format!(
                        "dissimilarity entry ({i},{j}) = {v} outside [0, 1]"
                    )));
                }
                if v != values.get(j, i) {
                    return Err(Error::Invalid(format!(
                        "dissimilarity not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(DissimilarityMatrix { values })
    }

    pub fn n(&self) -> usize {
        self.values.n()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values.get(i, j)
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.values
    }

    /// Sum of all entries (each unordered pair counted twice).
    pub fn total(&self) -> f64 {
        self.values.data.iter().sum()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cosine similarity between every pair of agent window vectors.
///
/// A zero-norm vector has cosine 0 with everything, including itself.
pub fn cosine_matrix(w: &WindowSlice) -> SquareMatrix {
    let n = w.num_agents();
    let norms: Vec<f64> = (0..n).map(|i| dot(w.feature(i), w.feature(i)).sqrt()).collect();
    let mut m = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let v = if norms[i] == 0.0 || norms[j] == 0.0 {
                0.0
            } else {
                let c = dot(w.feature(i), w.feature(j)) / (norms[i] * norms[j]);
                c.clamp(-1.0, 1.0)
            };
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    m
}

/// Euclidean distances between window vectors, divided by the matrix
/// maximum. An all-zero matrix is left as zeros.
pub fn distance_matrix(w: &WindowSlice) -> SquareMatrix {
    let n = w.num_agents();
    let mut m = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let d = w
                .feature(i)
                .iter()
                .zip(w.feature(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            m.set(i, j, d);
            m.set(j, i, d);
        }
    }
    let max = m.max_entry();
    if max > 0.0 {
        for v in &mut m.data {
            *v /= max;
        }
    }
    m
}

pub fn similarity_pair(w: &WindowSlice) -> SimilarityPair {
    SimilarityPair {
        cosine: cosine_matrix(w),
        distance: distance_matrix(w),
    }
}

/// Entry-wise `(1 - |cosine|) * distance`, diagonal forced to zero.
pub fn combine(p: &SimilarityPair) -> Result<DissimilarityMatrix> {
    let n = p.cosine.n();
    if p.distance.n() != n {
        return Err(Error::ShapeMismatch(format!(
            "cosine is {n}x{n} but distance is {m}x{m}",
            m = p.distance.n()
        )));
    }
    let mut values = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let v = (1.0 - p.cosine.get(i, j).abs()) * p.distance.get(i, j);
            values.set(i, j, v.clamp(0.0, 1.0));
        }
    }
    DissimilarityMatrix::from_matrix(values)
}
