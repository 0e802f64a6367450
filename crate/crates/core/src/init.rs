//! Initial embedding from the leading non-trivial eigenvectors of the
//! random-walk operator of the neighbor graph.
//!
//! The iteration runs on the lazy walk `(I + D^-1 A) / 2`, which has the same
//! eigenvectors as `D^-1 A` but a spectrum in `[0, 1]`, so the power method
//! converges to the largest eigenvalues rather than the largest in modulus.
//! After every multiplication the columns are re-orthonormalized against the
//! constant vector and against each other.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::graph::NeighborGraph;
use crate::model::EmbeddingState;

/// Standard deviation of every output column.
pub const INIT_SCALE: f64 = 1e-4;
pub const DEFAULT_POWER_ITERS: usize = 100;

/// Columns enter each step with unit norm; one whose norm falls below this
/// after multiplication and projection has collapsed.
const COLLAPSE_EPS: f64 = 1e-10;

/// Power-iteration initialization; returns `N x m` coordinates with `Q = 0`.
pub fn power_iteration_init(
    graph: &NeighborGraph,
    dim: usize,
    n_iter: usize,
    seed: u64,
) -> EmbeddingState {
    let n = graph.n_points();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<Vec<f64>> = (0..dim)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let mut alive = vec![true; dim];
    orthonormalize(&mut cols, &mut alive);

    let mut buf = vec![0.0; n];
    for _ in 0..n_iter {
        for (c, col) in cols.iter_mut().enumerate() {
            if alive[c] {
                lazy_walk(graph, col, &mut buf);
                std::mem::swap(col, &mut buf);
            }
        }
        orthonormalize(&mut cols, &mut alive);
    }

    for (c, col) in cols.iter_mut().enumerate() {
        if !alive[c] {
            col.iter_mut()
                .for_each(|v| *v = rng.random_range(-1.0..1.0));
        }
        rescale(col, INIT_SCALE);
    }

    let mut coords = vec![0.0; n * dim];
    for (c, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            coords[i * dim + c] = *v;
        }
    }
    EmbeddingState::new(n, dim, coords, 0.0).expect("shape is n x dim")
}

/// Uniform random coordinates with per-column standard deviation
/// [`INIT_SCALE`].
pub fn random_init(n_points: usize, dim: usize, seed: u64) -> EmbeddingState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = vec![0.0; n_points * dim];
    for c in 0..dim {
        let mut col: Vec<f64> = (0..n_points).map(|_| rng.random_range(-1.0..1.0)).collect();
        rescale(&mut col, INIT_SCALE);
        for (i, v) in col.into_iter().enumerate() {
            coords[i * dim + c] = v;
        }
    }
    EmbeddingState::new(n_points, dim, coords, 0.0).expect("shape is n x dim")
}

/// `out = (x + D^-1 A x) / 2`. Rows are independent, so the parallel loop
/// gives the same bits as a serial one.
fn lazy_walk(graph: &NeighborGraph, x: &[f64], out: &mut [f64]) {
    out.par_iter_mut()
        .enumerate()
        .with_min_len(1024)
        .for_each(|(i, o)| {
            let nb = graph.neighbors(i);
            let avg = if nb.is_empty() {
                0.0
            } else {
                nb.iter().map(|&j| x[j as usize]).sum::<f64>() / nb.len() as f64
            };
            *o = 0.5 * (x[i] + avg);
        });
}

/// Modified Gram-Schmidt against the constant vector and the preceding live
/// columns. Columns that collapse are zeroed and marked dead.
fn orthonormalize(cols: &mut [Vec<f64>], alive: &mut [bool]) {
    for c in 0..cols.len() {
        if !alive[c] {
            continue;
        }
        let (done, rest) = cols.split_at_mut(c);
        let col = &mut rest[0];
        let before = norm(col);
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        col.iter_mut().for_each(|v| *v -= mean);
        for (p, prev) in done.iter().enumerate() {
            if alive[p] {
                let proj = dot(col, prev);
                col.iter_mut().zip(prev).for_each(|(v, w)| *v -= proj * w);
            }
        }
        let nrm = norm(col);
        // A NaN norm counts as collapsed.
        if nrm > COLLAPSE_EPS * before.max(1.0) {
            col.iter_mut().for_each(|v| *v /= nrm);
        } else {
            col.fill(0.0);
            alive[c] = false;
        }
    }
}

fn rescale(col: &mut [f64], target_std: f64) {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    col.iter_mut().for_each(|v| *v -= mean);
    let std = (col.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
    if std > 0.0 {
        let s = target_std / std;
        col.iter_mut().for_each(|v| *v *= s);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
