//! Fixtures shared by the integration tests.

#![allow(dead_code)]

use std::path::PathBuf;

use ncvis::{DataMatrix, EmbeddingState, NeighborGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("data")
}

/// `n` i.i.d. standard normal points in `dim` dimensions.
pub fn gaussian(n: usize, dim: usize, seed: u64) -> DataMatrix {
    let mut r = rng(seed);
    let values = (0..n * dim).map(|_| r.sample(StandardNormal)).collect();
    DataMatrix::new(n, dim, values).unwrap()
}

/// Unit-variance blobs centered at `sep * e_c` for blob `c`. Returns the
/// data and the blob of every row.
pub fn blobs(
    n_per: usize,
    n_blobs: usize,
    dim: usize,
    sep: f64,
    seed: u64,
) -> (DataMatrix, Vec<usize>) {
    assert!(n_blobs <= dim);
    let mut r = rng(seed);
    let mut values = Vec::with_capacity(n_per * n_blobs * dim);
    let mut labels = Vec::with_capacity(n_per * n_blobs);
    for c in 0..n_blobs {
        for _ in 0..n_per {
            for d in 0..dim {
                let z: f64 = r.sample(StandardNormal);
                values.push(z + if d == c { sep } else { 0.0 });
            }
            labels.push(c);
        }
    }
    (
        DataMatrix::new(n_per * n_blobs, dim, values).unwrap(),
        labels,
    )
}

/// The 64-point, two-blob dataset used for the optimizer's separation checks.
pub fn two_blobs() -> (DataMatrix, Vec<usize>) {
    blobs(32, 2, 5, 20.0, 2024)
}

/// Mean embedding distance within and between label groups.
pub fn intra_inter(state: &EmbeddingState, labels: &[usize]) -> (f64, f64) {
    let (mut intra, mut n_intra, mut inter, mut n_inter) = (0.0, 0usize, 0.0, 0usize);
    for i in 0..state.n_points() {
        for j in i + 1..state.n_points() {
            let d = dist(state.point(i), state.point(j));
            if labels[i] == labels[j] {
                intra += d;
                n_intra += 1;
            } else {
                inter += d;
                n_inter += 1;
            }
        }
    }
    (intra / n_intra as f64, inter / n_inter as f64)
}

pub fn dist(u: &[f64], v: &[f64]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// The `k` nearest embedding neighbors of every point, nearest first. Brute
/// force, ties broken by index.
fn embedding_knn(state: &EmbeddingState, k: usize) -> Vec<Vec<usize>> {
    let n = state.n_points();
    let mut cand: Vec<(f64, usize)> = Vec::with_capacity(n);
    (0..n)
        .map(|i| {
            cand.clear();
            cand.extend(
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (dist(state.point(i), state.point(j)), j)),
            );
            let by = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            cand.select_nth_unstable_by(k - 1, by);
            cand[..k].sort_unstable_by(by);
            cand[..k].iter().map(|&(_, j)| j).collect()
        })
        .collect()
}

/// Mean fraction of each point's `k` nearest embedding neighbors that share
/// its label.
pub fn knn_label_agreement<L: PartialEq>(state: &EmbeddingState, labels: &[L], k: usize) -> f64 {
    let nn = embedding_knn(state, k);
    let total: f64 = nn
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().filter(|&&j| labels[j] == labels[i]).count() as f64 / k as f64)
        .sum();
    total / nn.len() as f64
}

/// Leave-one-out accuracy of a `k`-nearest-neighbor majority vote in the
/// embedding. A tied vote goes to the tied label seen first, i.e. nearest.
pub fn knn_vote_accuracy<L: PartialEq>(state: &EmbeddingState, labels: &[L], k: usize) -> f64 {
    let nn = embedding_knn(state, k);
    let correct = nn
        .iter()
        .enumerate()
        .filter(|(i, row)| {
            let votes = |l: &L| row.iter().filter(|&&j| labels[j] == *l).count();
            let winner = row
                .iter()
                .map(|&j| &labels[j])
                .fold(None::<(&L, usize)>, |best, l| {
                    let v = votes(l);
                    match best {
                        Some((_, bv)) if bv >= v => best,
                        _ => Some((l, v)),
                    }
                });
            winner.is_some_and(|(l, _)| *l == labels[*i])
        })
        .count();
    correct as f64 / nn.len() as f64
}

/// Random simple undirected graph on `n` nodes; every node gets between one
/// and `max_deg` random partners before symmetrization.
pub fn random_graph(n: usize, max_deg: usize, seed: u64) -> NeighborGraph {
    let mut r = rng(seed);
    let mut pairs = Vec::new();
    for i in 0..n {
        for _ in 0..r.random_range(1..=max_deg) {
            let mut j = r.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            pairs.push((i, j));
        }
    }
    NeighborGraph::from_pairs(n, pairs).unwrap()
}

/// Central finite difference of `f` at `x` in every coordinate.
pub fn finite_diff(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut buf = x.to_vec();
    (0..x.len())
        .map(|c| {
            buf[c] = x[c] + h;
            let up = f(&buf);
            buf[c] = x[c] - h;
            let down = f(&buf);
            buf[c] = x[c];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `|a - b| / max(|a|, |b|)` over whole vectors, 0 when both vanish.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}
