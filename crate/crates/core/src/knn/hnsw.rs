//! Hierarchical navigable small world index.
//!
//! Points are inserted in row order. Each point gets a level drawn from a
//! geometric distribution (normalization `1 / ln(m_conn)`); upper layers are
//! sparse and route a greedy descent toward the query's neighborhood, and the
//! bottom layer holds every point with up to `2 * m_conn` links.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{KnnResult, Scored};
use crate::distance::{distance, dot_f32, norm, sq_dist_f32};
use crate::error::{Error, Result};
use crate::model::{DataMatrix, Metric};

const MAX_LEVEL: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HnswParams {
    /// Links per node on upper layers; the bottom layer allows twice this.
    pub m_conn: usize,
    pub ef_construction: usize,
    /// Beam width for queries. `None` picks `max(2k, 100)`.
    pub ef_search: Option<usize>,
}

impl Default for HnswParams {
    fn default() -> Self {
        HnswParams {
            m_conn: 16,
            ef_construction: 200,
            ef_search: None,
        }
    }
}

impl HnswParams {
    pub fn ef_for(&self, k: usize) -> usize {
        self.ef_search.unwrap_or_else(|| (2 * k).max(100))
    }

    fn max_links(&self, level: usize) -> usize {
        if level == 0 {
            2 * self.m_conn
        } else {
            self.m_conn
        }
    }
}

#[derive(Clone, Debug)]
pub struct HnswIndex {
    metric: Metric,
    params: HnswParams,
    levels: Vec<usize>,
    /// Bottom layer: `base_cap` slots per point, the first `base_len[point]`
    /// in use. One contiguous block keeps the hot layer cache friendly.
    base: Vec<u32>,
    base_len: Vec<u32>,
    base_cap: usize,
    /// `upper[point][level - 1]` for `1 <= level <= levels[point]`.
    upper: Vec<Vec<Vec<u32>>>,
    entry: usize,
    top_level: usize,
    space: Space,
}

/// Single-precision copy of the indexed rows; cosine rows are stored with
/// unit norm. Half the footprint of the input means fewer cache misses per
/// graph hop. Reported neighbor distances are recomputed in double precision.
#[derive(Clone, Debug)]
struct Space {
    vectors: Vec<f32>,
    dim: usize,
    metric: Metric,
}

impl Space {
    fn new(data: &DataMatrix, metric: Metric) -> Self {
        let mut vectors = Vec::with_capacity(data.rows() * data.cols());
        for i in 0..data.rows() {
            let row = data.row(i);
            let scale = match metric {
                Metric::Euclidean => 1.0,
                Metric::Cosine => {
                    let n = norm(row);
                    if n > 0.0 {
                        1.0 / n
                    } else {
                        0.0
                    }
                }
            };
            vectors.extend(row.iter().map(|&v| (v * scale) as f32));
        }
        Space {
            vectors,
            dim: data.cols(),
            metric,
        }
    }

    fn len(&self) -> usize {
        self.vectors.len().checked_div(self.dim).unwrap_or(0)
    }

    #[inline]
    fn row(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    fn dist(&self, i: usize, j: usize) -> f64 {
        let (u, v) = (self.row(i), self.row(j));
        f64::from(match self.metric {
            Metric::Euclidean => sq_dist_f32(u, v),
            // A zero row stays zero, which keeps "distance 1 from everything".
            Metric::Cosine => (1.0 - dot_f32(u, v)).clamp(0.0, 2.0),
        })
    }
}

/// Generation-stamped visited set, reused across searches.
struct Visited {
    marks: Vec<u32>,
    generation: u32,
}

impl Visited {
    fn new(n: usize) -> Self {
        Visited {
            marks: vec![0; n],
            generation: 0,
        }
    }

    fn reset(&mut self) {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.marks.fill(0);
            self.generation = 1;
        }
    }

    /// Returns true if `i` was not yet visited.
    #[inline]
    fn insert(&mut self, i: usize) -> bool {
        if self.marks[i] == self.generation {
            false
        } else {
            self.marks[i] = self.generation;
            true
        }
    }
}

/// Per-thread buffers for [`HnswIndex::search_layer`].
struct Scratch {
    visited: Visited,
    candidates: BinaryHeap<Reverse<Scored>>,
    found: BinaryHeap<Scored>,
    fresh: Vec<usize>,
    dists: Vec<f64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            visited: Visited::new(n),
            candidates: BinaryHeap::new(),
            found: BinaryHeap::new(),
            fresh: Vec::new(),
            dists: Vec::new(),
        }
    }
}

impl HnswIndex {
    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn params(&self) -> HnswParams {
        self.params
    }

    pub fn n_points(&self) -> usize {
        self.levels.len()
    }

    pub fn entry_point(&self) -> usize {
        self.entry
    }

    pub fn top_level(&self) -> usize {
        self.top_level
    }

    pub fn level_of(&self, point: usize) -> usize {
        self.levels[point]
    }

    /// Adjacency of `point` on `level`; empty if the point does not reach it.
    pub fn neighbors(&self, level: usize, point: usize) -> &[u32] {
        if level == 0 {
            let start = point * self.base_cap;
            &self.base[start..start + self.base_len[point] as usize]
        } else {
            self.upper[point].get(level - 1).map_or(&[], Vec::as_slice)
        }
    }

    fn set_links(&mut self, level: usize, point: usize, links: impl ExactSizeIterator<Item = u32>) {
        if level == 0 {
            debug_assert!(links.len() <= self.base_cap);
            let start = point * self.base_cap;
            self.base_len[point] = links.len() as u32;
            for (slot, l) in self.base[start..].iter_mut().zip(links) {
                *slot = l;
            }
        } else {
            let row = &mut self.upper[point][level - 1];
            row.clear();
            row.extend(links);
        }
    }

    /// Beam search on one layer starting from `entries`; returns up to `ef`
    /// closest nodes to `query`, nearest first.
    fn search_layer(
        &self,
        space: &Space,
        query: usize,
        entries: &[Scored],
        ef: usize,
        level: usize,
        scratch: &mut Scratch,
    ) -> Vec<Scored> {
        let Scratch {
            visited,
            candidates,
            found,
            fresh,
            dists,
        } = scratch;
        visited.reset();
        candidates.clear();
        found.clear();
        for &e in entries {
            if visited.insert(e.idx) {
                candidates.push(Reverse(e));
                found.push(e);
                if found.len() > ef {
                    found.pop();
                }
            }
        }
        while let Some(Reverse(c)) = candidates.pop() {
            if found.len() >= ef && found.peek().is_some_and(|w| c > *w) {
                break;
            }
            // Filter first, then measure: independent row loads overlap
            // better than loads interleaved with heap updates.
            fresh.clear();
            fresh.extend(
                self.neighbors(level, c.idx)
                    .iter()
                    .map(|&nb| nb as usize)
                    .filter(|&nb| visited.insert(nb)),
            );
            dists.clear();
            dists.extend(fresh.iter().map(|&nb| space.dist(query, nb)));
            for (&nb, &dist) in fresh.iter().zip(dists.iter()) {
                let s = Scored { dist, idx: nb };
                if found.len() < ef || found.peek().is_some_and(|w| s < *w) {
                    candidates.push(Reverse(s));
                    found.push(s);
                    if found.len() > ef {
                        found.pop();
                    }
                }
            }
        }
        let mut out: Vec<Scored> = found.drain().collect();
        out.sort_unstable();
        out
    }

    fn greedy_descent(&self, space: &Space, query: usize, down_to: usize) -> Scored {
        let mut cur = Scored {
            dist: space.dist(query, self.entry),
            idx: self.entry,
        };
        for level in (down_to + 1..=self.top_level).rev() {
            loop {
                let mut moved = false;
                for &nb in self.neighbors(level, cur.idx) {
                    let s = Scored {
                        dist: space.dist(query, nb as usize),
                        idx: nb as usize,
                    };
                    if s < cur {
                        cur = s;
                        moved = true;
                    }
                }
                if !moved {
                    break;
                }
            }
        }
        cur
    }

    /// Keeps a candidate only if it is closer to the base point than to any
    /// neighbor already kept. `candidates` must be sorted nearest first.
    fn select_neighbors(space: &Space, candidates: &[Scored], m: usize) -> Vec<Scored> {
        let mut kept: Vec<Scored> = Vec::with_capacity(m);
        for &c in candidates {
            if kept.len() >= m {
                break;
            }
            if kept.iter().all(|r| space.dist(c.idx, r.idx) > c.dist) {
                kept.push(c);
            }
        }
        kept
    }

    fn insert(&mut self, space: &Space, point: usize, scratch: &mut Scratch) {
        let level = self.levels[point];
        if point == 0 {
            self.entry = 0;
            self.top_level = level;
            return;
        }
        let start = self.greedy_descent(space, point, level);
        let mut entries = vec![start];
        let mut grown: Vec<Scored> = Vec::new();
        for l in (0..=level.min(self.top_level)).rev() {
            let found = self.search_layer(
                space,
                point,
                &entries,
                self.params.ef_construction,
                l,
                scratch,
            );
            let chosen = Self::select_neighbors(space, &found, self.params.m_conn);
            self.set_links(l, point, chosen.iter().map(|s| s.idx as u32));
            let cap = self.params.max_links(l);
            for s in &chosen {
                let nb = s.idx;
                let current = self.neighbors(l, nb);
                if current.len() < cap {
                    let mut row = current.to_vec();
                    row.push(point as u32);
                    self.set_links(l, nb, row.into_iter());
                    continue;
                }
                grown.clear();
                grown.extend(current.iter().map(|&x| Scored {
                    dist: space.dist(nb, x as usize),
                    idx: x as usize,
                }));
                grown.push(Scored {
                    dist: s.dist,
                    idx: point,
                });
                grown.sort_unstable();
                let pruned = Self::select_neighbors(space, &grown, cap);
                self.set_links(l, nb, pruned.iter().map(|s| s.idx as u32));
            }
            entries = found;
        }
        if level > self.top_level {
            self.top_level = level;
            self.entry = point;
        }
    }
}

/// Builds the index over every row of `data`. The same data, parameters and
/// seed always produce identical adjacency lists.
pub fn build_hnsw(data: &DataMatrix, metric: Metric, params: HnswParams, seed: u64) -> HnswIndex {
    let n = data.rows();
    let m_conn = params.m_conn.max(2);
    let params = HnswParams { m_conn, ..params };
    let level_norm = 1.0 / (m_conn as f64).ln();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let levels: Vec<usize> = (0..n)
        .map(|_| {
            let u: f64 = 1.0 - rng.random::<f64>();
            ((-u.ln() * level_norm).floor() as usize).min(MAX_LEVEL)
        })
        .collect();
    let base_cap = params.max_links(0);
    let upper = levels.iter().map(|&l| vec![Vec::new(); l]).collect();
    let mut index = HnswIndex {
        metric,
        params,
        levels,
        base: vec![0; n * base_cap],
        base_len: vec![0; n],
        base_cap,
        upper,
        entry: 0,
        top_level: 0,
        space: Space {
            vectors: Vec::new(),
            dim: data.cols(),
            metric,
        },
    };
    // The space is moved out while inserting so the links can be mutated.
    let space = Space::new(data, metric);
    let mut scratch = Scratch::new(n);
    for point in 0..n {
        index.insert(&space, point, &mut scratch);
    }
    index.space = space;
    index
}

/// Approximate `k` nearest neighbors of every indexed row, using the
/// default query beam width.
pub fn query_knn(index: &HnswIndex, data: &DataMatrix, k: usize) -> Result<KnnResult> {
    query_knn_with_ef(index, data, k, index.params.ef_for(k))
}

pub fn query_knn_with_ef(
    index: &HnswIndex,
    data: &DataMatrix,
    k: usize,
    ef: usize,
) -> Result<KnnResult> {
    let n = data.rows();
    if k >= n {
        return Err(Error::TooManyNeighbors { k, n });
    }
    if index.n_points() != n {
        return Err(Error::DimensionMismatch {
            context: "knn",
            expected: index.n_points(),
            found: n,
        });
    }
    if index.space.dim != data.cols() {
        return Err(Error::DimensionMismatch {
            context: "knn",
            expected: index.space.dim,
            found: data.cols(),
        });
    }
    let ef = ef.max(k + 1);
    let space = &index.space;
    let rows: Vec<Vec<Scored>> = (0..n)
        .into_par_iter()
        .map_init(
            || Scratch::new(n),
            |scratch, i| {
                let start = index.greedy_descent(space, i, 0);
                let found = index.search_layer(space, i, &[start], ef, 0, scratch);
                let mut row: Vec<Scored> =
                    found.into_iter().filter(|s| s.idx != i).take(k).collect();
                if row.len() < k {
                    row = brute_force_row(space, i, k);
                }
                for s in &mut row {
                    s.dist = distance(index.metric, data.row(i), data.row(s.idx));
                }
                row.sort_unstable();
                row
            },
        )
        .collect();
    let mut neighbors = Vec::with_capacity(n * k);
    let mut distances = Vec::with_capacity(n * k);
    for row in rows {
        for s in row {
            neighbors.push(s.idx);
            distances.push(s.dist);
        }
    }
    KnnResult::from_parts(n, k, neighbors, distances)
}

/// Fallback for the rare query whose reachable set is smaller than `k`.
fn brute_force_row(space: &Space, i: usize, k: usize) -> Vec<Scored> {
    let mut all: Vec<Scored> = (0..space.len())
        .filter(|&j| j != i)
        .map(|j| Scored {
            dist: space.dist(i, j),
            idx: j,
        })
        .collect();
    all.sort_unstable();
    all.truncate(k);
    all
}
