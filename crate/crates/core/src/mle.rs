//! Normalized maximum-likelihood reference.
//!
//! Evaluates the likelihood of the data edges under the explicitly
//! normalized model `q_ij / sum_{k != l} q_kl` and ascends it with exact
//! full-batch gradients. Quadratic in `N`; intended for a few hundred points
//! at most, as a yardstick for the noise-contrastive optimizer.

use crate::graph::NeighborGraph;
use crate::init::random_init;
use crate::model::EmbeddingState;
use crate::nce::{kernel_coef, log_model_prob_sq, sq_norm_diff};

/// `sum_edges p_d(i, j) log(qhat_ij / Z)` with `Z = sum_{i != j} qhat_ij`.
/// Does not depend on `Q`.
pub fn normalized_likelihood(state: &EmbeddingState, graph: &NeighborGraph, a: f64, b: f64) -> f64 {
    let log_z = log_partition(state, a, b);
    graph
        .edges()
        .zip(graph.edge_probs())
        .map(|((i, j), &p)| {
            let d2 = sq_norm_diff(state.point(i), state.point(j));
            p * (log_model_prob_sq(d2, 0.0, a, b) - log_z)
        })
        .sum()
}

fn log_partition(state: &EmbeddingState, a: f64, b: f64) -> f64 {
    let n = state.n_points();
    let mut z = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d2 = sq_norm_diff(state.point(i), state.point(j));
            z += 2.0 * log_model_prob_sq(d2, 0.0, a, b).exp();
        }
    }
    z.ln()
}

/// Exact gradient of [`normalized_likelihood`] with respect to the
/// coordinates, row-major.
pub fn likelihood_gradient(
    state: &EmbeddingState,
    graph: &NeighborGraph,
    a: f64,
    b: f64,
) -> Vec<f64> {
    let n = state.n_points();
    let m = state.dim();
    let mut grad = vec![0.0; n * m];

    for ((i, j), &p) in graph.edges().zip(graph.edge_probs()) {
        let (zi, zj) = (state.point(i), state.point(j));
        let coef = p * kernel_coef(sq_norm_diff(zi, zj), a, b);
        for c in 0..m {
            let g = coef * (zi[c] - zj[c]);
            grad[i * m + c] += g;
            grad[j * m + c] -= g;
        }
    }

    // d(-log Z)/dz_i = -(2 / Z) sum_{j != i} qhat_ij * kernel_coef_ij * (z_i - z_j)
    let mut z = 0.0;
    let mut zgrad = vec![0.0; n * m];
    for i in 0..n {
        for j in i + 1..n {
            let (zi, zj) = (state.point(i), state.point(j));
            let d2 = sq_norm_diff(zi, zj);
            let qhat = log_model_prob_sq(d2, 0.0, a, b).exp();
            z += 2.0 * qhat;
            let coef = 2.0 * qhat * kernel_coef(d2, a, b);
            for c in 0..m {
                let g = coef * (zi[c] - zj[c]);
                zgrad[i * m + c] += g;
                zgrad[j * m + c] -= g;
            }
        }
    }
    for (g, zg) in grad.iter_mut().zip(&zgrad) {
        *g -= zg / z;
    }
    grad
}

/// Full-batch gradient ascent from `init`; `Q` is left untouched.
pub fn mle_gradient_ascent_from(
    init: &EmbeddingState,
    graph: &NeighborGraph,
    a: f64,
    b: f64,
    n_steps: usize,
    step: f64,
) -> EmbeddingState {
    let mut state = init.clone();
    for _ in 0..n_steps {
        let g = likelihood_gradient(&state, graph, a, b);
        for (z, g) in state.coords_mut().iter_mut().zip(&g) {
            *z += step * g;
        }
    }
    state
}

/// Full-batch gradient ascent from a seeded small random embedding.
pub fn mle_gradient_ascent(
    graph: &NeighborGraph,
    dim: usize,
    a: f64,
    b: f64,
    n_steps: usize,
    step: f64,
    seed: u64,
) -> EmbeddingState {
    let init = random_init(graph.n_points(), dim, seed);
    mle_gradient_ascent_from(&init, graph, a, b, n_steps, step)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> (EmbeddingState, NeighborGraph) {
        let h = 3f64.sqrt() / 2.0;
        let state = EmbeddingState::new(3, 2, vec![0.0, 0.0, 1.0, 0.0, 0.5, h], 0.0).unwrap();
        let graph = NeighborGraph::from_pairs(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        (state, graph)
    }

    #[test]
    fn equilateral_triangle_is_uniform() {
        let (state, graph) = triangle();
        let l = normalized_likelihood(&state, &graph, 1.0, 1.0);
        assert!((l - (1.0f64 / 6.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn invariant_to_translation_and_q() {
        let (mut state, graph) = triangle();
        let base = normalized_likelihood(&state, &graph, 1.0, 1.0);
        state.q = 3.7;
        assert_eq!(normalized_likelihood(&state, &graph, 1.0, 1.0), base);
        for (k, z) in state.coords_mut().iter_mut().enumerate() {
            *z += if k % 2 == 0 { 12.5 } else { -3.25 };
        }
        assert!((normalized_likelihood(&state, &graph, 1.0, 1.0) - base).abs() < 1e-12);
    }

    #[test]
    fn triangle_ascent_becomes_equilateral() {
        let graph = NeighborGraph::from_pairs(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let init = EmbeddingState::new(3, 2, vec![0.0, 0.0, 0.3, 0.05, 0.1, 0.2], 0.0).unwrap();
        let out = mle_gradient_ascent_from(&init, &graph, 1.0, 1.0, 5000, 0.5);
        let d = |i: usize, j: usize| sq_norm_diff(out.point(i), out.point(j)).sqrt();
        let (d01, d12, d02) = (d(0, 1), d(1, 2), d(0, 2));
        assert!(
            (d01 - d12).abs() < 1e-3 && (d01 - d02).abs() < 1e-3,
            "{d01} {d12} {d02}"
        );
    }
}
