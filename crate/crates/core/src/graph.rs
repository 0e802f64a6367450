//! Edge distributions derived from the kNN relation.
//!
//! Two points are linked when either is among the other's `k` nearest
//! neighbors. Every ordered pair `(i, j)` of linked points is an edge, and
//! the data distribution is uniform over edges. The noise distribution picks
//! a source `i` the way a data edge would, then a target uniformly among the
//! other `N - 1` points, so `p_n(i, j) = r_i / (N - 1)` where `r_i` is the
//! data mass of edges leaving `i`.

use rand::Rng;

use crate::alias::AliasTable;
use crate::error::{Error, Result};
use crate::knn::KnnResult;

#[derive(Clone, Debug, PartialEq)]
pub struct NeighborGraph {
    n_points: usize,
    /// Edge `e` goes from `sources[e]` to `targets[e]`; edges are sorted by
    /// source, then target.
    sources: Vec<u32>,
    targets: Vec<u32>,
    /// Edges leaving `i` occupy `offsets[i]..offsets[i + 1]`.
    offsets: Vec<usize>,
    edge_prob: Vec<f64>,
    row_sum: Vec<f64>,
}

impl NeighborGraph {
    /// Symmetric closure of `pairs` over `n_points` nodes, with uniform edge
    /// probabilities. Self pairs and duplicates are dropped.
    pub fn from_pairs(
        n_points: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n_points];
        for (i, j) in pairs {
            if i >= n_points || j >= n_points {
                return Err(Error::Graph(format!(
                    "pair ({i}, {j}) out of range for {n_points} points"
                )));
            }
            if i != j {
                adj[i].push(j as u32);
                adj[j].push(i as u32);
            }
        }
        let mut sources = Vec::new();
        let mut targets = Vec::new();
        let mut offsets = Vec::with_capacity(n_points + 1);
        offsets.push(0);
        for (i, row) in adj.iter_mut().enumerate() {
            row.sort_unstable();
            row.dedup();
            sources.extend(std::iter::repeat_n(i as u32, row.len()));
            targets.extend_from_slice(row);
            offsets.push(targets.len());
        }
        if targets.is_empty() {
            return Err(Error::Graph("edge set is empty".into()));
        }
        let n_edges = targets.len();
        let p = 1.0 / n_edges as f64;
        let row_sum = offsets
            .windows(2)
            .map(|w| (w[1] - w[0]) as f64 * p)
            .collect();
        Ok(NeighborGraph {
            n_points,
            sources,
            targets,
            offsets,
            edge_prob: vec![p; n_edges],
            row_sum,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_edges(&self) -> usize {
        self.targets.len()
    }

    #[inline]
    pub fn edge(&self, e: usize) -> (usize, usize) {
        (self.sources[e] as usize, self.targets[e] as usize)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.sources
            .iter()
            .zip(&self.targets)
            .map(|(&i, &j)| (i as usize, j as usize))
    }

    /// Data probability of each edge, aligned with [`edges`](Self::edges).
    pub fn edge_probs(&self) -> &[f64] {
        &self.edge_prob
    }

    /// Targets of the edges leaving `i`, sorted.
    #[inline]
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&(j as u32)).is_ok()
    }

    /// Data probability of the ordered pair, zero when not an edge.
    pub fn data_prob(&self, i: usize, j: usize) -> f64 {
        match self.neighbors(i).binary_search(&(j as u32)) {
            Ok(pos) => self.edge_prob[self.offsets[i] + pos],
            Err(_) => 0.0,
        }
    }

    /// `r_i`: total data probability of edges leaving `i`.
    pub fn row_sums(&self) -> &[f64] {
        &self.row_sum
    }

    /// Noise probability of any pair with source `i`; no check that the
    /// target differs from `i`.
    #[inline]
    pub fn noise_prob_from(&self, i: usize) -> f64 {
        self.row_sum[i] / (self.n_points - 1) as f64
    }
}

/// Symmetrized kNN graph: `(i, j)` is an edge iff `j` is a neighbor of `i` or
/// `i` is a neighbor of `j`.
pub fn build_graph(knn: &KnnResult) -> Result<NeighborGraph> {
    let n = knn.n_points();
    NeighborGraph::from_pairs(
        n,
        (0..n).flat_map(|i| knn.neighbors(i).iter().map(move |&j| (i, j))),
    )
}

/// `p_n(i, j) = r_i / (N - 1)` for `i != j`.
pub fn noise_prob(graph: &NeighborGraph, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(Error::Graph(format!(
            "noise probability undefined for i = j = {i}"
        )));
    }
    if i >= graph.n_points() || j >= graph.n_points() {
        return Err(Error::Graph(format!("pair ({i}, {j}) out of range")));
    }
    Ok(graph.noise_prob_from(i))
}

/// Constant-time sampler for data and noise edges. Holds no RNG state, so
/// any number of workers can share one sampler.
#[derive(Clone, Debug)]
pub struct EdgeSampler<'g> {
    graph: &'g NeighborGraph,
    data_alias: AliasTable,
}

impl<'g> EdgeSampler<'g> {
    pub fn new(graph: &'g NeighborGraph) -> Result<Self> {
        Ok(EdgeSampler {
            graph,
            data_alias: AliasTable::new(graph.edge_probs())?,
        })
    }

    pub fn graph(&self) -> &'g NeighborGraph {
        self.graph
    }

    pub fn n_points(&self) -> usize {
        self.graph.n_points()
    }

    pub fn data_alias(&self) -> &AliasTable {
        &self.data_alias
    }

    /// Draws an edge with probability `p_d(i, j)`.
    #[inline]
    pub fn sample_data_edge<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        self.graph.edge(self.data_alias.sample(rng))
    }

    /// Draws a source as the source of a data edge, then a target uniformly
    /// from the remaining points. Pairs that happen to be real edges are kept.
    #[inline]
    pub fn sample_noise_edge<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let e = self.data_alias.sample(rng);
        let i = self.graph.sources[e] as usize;
        let mut t = rng.random_range(0..self.graph.n_points - 1);
        if t >= i {
            t += 1;
        }
        (i, t)
    }
}
