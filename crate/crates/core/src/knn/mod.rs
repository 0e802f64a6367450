//! k-nearest-neighbor relation over the input rows.
//!
//! [`HnswIndex`] is the production path; [`exact_knn`] is a full pairwise
//! scan used to measure its recall.

mod exact;
mod hnsw;

use std::cmp::Ordering;

pub use exact::exact_knn;
pub use hnsw::{build_hnsw, query_knn, query_knn_with_ef, HnswIndex, HnswParams};

use crate::error::{Error, Result};

/// `k` neighbors per point, nearest first, the point itself excluded.
#[derive(Clone, Debug, PartialEq)]
pub struct KnnResult {
    n_points: usize,
    k: usize,
    neighbors: Vec<usize>,
    distances: Vec<f64>,
}

impl KnnResult {
    /// Assembles a result from flat row-major tables, checking the row
    /// invariants (no self loops, indices in range, sorted distances).
    pub fn from_parts(
        n_points: usize,
        k: usize,
        neighbors: Vec<usize>,
        distances: Vec<f64>,
    ) -> Result<Self> {
        if neighbors.len() != n_points * k || distances.len() != n_points * k {
            return Err(Error::DimensionMismatch {
                context: "knn",
                expected: n_points * k,
                found: neighbors.len().min(distances.len()),
            });
        }
        let r = KnnResult {
            n_points,
            k,
            neighbors,
            distances,
        };
        for i in 0..n_points {
            let row = r.neighbors(i);
            if row.iter().any(|&j| j == i || j >= n_points) {
                return Err(Error::Graph(format!(
                    "neighbor row {i} contains itself or an out-of-range index"
                )));
            }
            if r.distances(i).windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::Graph(format!("neighbor row {i} is not sorted")));
            }
        }
        Ok(r)
    }

    #[inline]
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i * self.k..(i + 1) * self.k]
    }

    #[inline]
    pub fn distances(&self, i: usize) -> &[f64] {
        &self.distances[i * self.k..(i + 1) * self.k]
    }

    /// Fraction of exact neighbors recovered, averaged over points.
    pub fn recall_against(&self, exact: &KnnResult) -> f64 {
        assert_eq!(self.n_points, exact.n_points);
        assert_eq!(self.k, exact.k);
        let mut hits = 0usize;
        for i in 0..self.n_points {
            let truth = exact.neighbors(i);
            hits += self
                .neighbors(i)
                .iter()
                .filter(|j| truth.contains(j))
                .count();
        }
        hits as f64 / (self.n_points * self.k) as f64
    }
}

/// Candidate ordered by distance, then by index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Scored {
    pub dist: f64,
    pub idx: usize,
}

impl Eq for Scored {}

impl PartialOrd for Scored {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scored {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.idx.cmp(&other.idx))
    }
}
