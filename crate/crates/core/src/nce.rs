//! Model density plus the per-sample noise-contrastive objective terms with
//! their gradients.
//!
//! The unnormalized model of a pair is
//! `p_m(i, j) = exp(-Q) / (1 + a * d^(2b))` with `d = |z_i - z_j|`.
//! A data edge contributes `log(p_m / (p_m + nu p_n))` to the objective and
//! a noise edge contributes `log(nu p_n / (p_m + nu p_n))`. Both are computed
//! from log-densities so wildly different magnitudes neither underflow nor
//! cancel.

use crate::graph::NeighborGraph;
use crate::model::{EmbeddingState, Hyperparams};

/// Lower bound on the pair distance inside the kernel gradient when `b < 1`,
/// where `d^(2b - 2)` diverges at zero.
pub const MIN_KERNEL_DIST: f64 = 1e-12;

/// Gradient of one sample's objective term in every parameter it touches,
/// plus the term itself.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleGrad {
    pub d_zi: Vec<f64>,
    pub d_zj: Vec<f64>,
    pub d_q: f64,
    pub objective_term: f64,
}

/// Scalar summary of one sample: the coordinate gradient is
/// `coef * (z_i - z_j)` for `z_i` and its negation for `z_j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct PairStep {
    pub coef: f64,
    pub d_q: f64,
    pub objective: f64,
}

#[inline]
fn softplus(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        0.0
    } else {
        x.max(0.0) + (-x.abs()).exp().ln_1p()
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub(crate) fn sq_norm_diff(zi: &[f64], zj: &[f64]) -> f64 {
    zi.iter()
        .zip(zj)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

/// `a * d^(2b)` from the squared distance.
#[inline]
fn kernel_power(d2: f64, a: f64, b: f64) -> f64 {
    if b == 1.0 {
        a * d2
    } else {
        a * d2.powf(b)
    }
}

/// `log p_m` from the squared distance.
#[inline]
pub(crate) fn log_model_prob_sq(d2: f64, q: f64, a: f64, b: f64) -> f64 {
    -q - kernel_power(d2, a, b).ln_1p()
}

/// Scalar `c` with `d log p_m / d z_i = c * (z_i - z_j)`:
/// `c = -2ab d^(2b-2) / (1 + a d^(2b))`.
#[inline]
pub(crate) fn kernel_coef(d2: f64, a: f64, b: f64) -> f64 {
    if b == 1.0 {
        -2.0 * a / (1.0 + a * d2)
    } else {
        let d2c = if b < 1.0 {
            d2.max(MIN_KERNEL_DIST * MIN_KERNEL_DIST)
        } else {
            d2
        };
        -2.0 * a * b * d2c.powf(b - 1.0) / (1.0 + a * d2.powf(b))
    }
}

/// `q_ij = exp(-Q) / (1 + a |z_i - z_j|^(2b))`.
pub fn model_prob(zi: &[f64], zj: &[f64], q: f64, a: f64, b: f64) -> f64 {
    log_model_prob_sq(sq_norm_diff(zi, zj), q, a, b).exp()
}

/// `log(pm / (pm + nu pn))`.
pub fn positive_term(pm: f64, pn: f64, nu: usize) -> f64 {
    positive_term_log(pm.ln(), (nu as f64 * pn).ln())
}

/// `log(nu pn / (pm + nu pn))`.
pub fn noise_term(pm: f64, pn: f64, nu: usize) -> f64 {
    noise_term_log(pm.ln(), (nu as f64 * pn).ln())
}

#[inline]
pub(crate) fn positive_term_log(log_pm: f64, log_nu_pn: f64) -> f64 {
    -softplus(log_nu_pn - log_pm)
}

#[inline]
pub(crate) fn noise_term_log(log_pm: f64, log_nu_pn: f64) -> f64 {
    -softplus(log_pm - log_nu_pn)
}

/// Data-edge step: weight `nu pn / (pm + nu pn)` times `grad log p_m`.
#[inline]
pub(crate) fn positive_step(d2: f64, q: f64, a: f64, b: f64, log_nu_pn: f64) -> PairStep {
    let log_pm = log_model_prob_sq(d2, q, a, b);
    let w = sigmoid(log_nu_pn - log_pm);
    PairStep {
        coef: w * kernel_coef(d2, a, b),
        d_q: -w,
        objective: positive_term_log(log_pm, log_nu_pn),
    }
}

/// Noise-edge step: weight `-pm / (pm + nu pn)` times `grad log p_m`.
#[inline]
pub(crate) fn noise_step(d2: f64, q: f64, a: f64, b: f64, log_nu_pn: f64) -> PairStep {
    let log_pm = log_model_prob_sq(d2, q, a, b);
    let w = -sigmoid(log_pm - log_nu_pn);
    PairStep {
        coef: w * kernel_coef(d2, a, b),
        d_q: -w,
        objective: noise_term_log(log_pm, log_nu_pn),
    }
}

fn expand(step: PairStep, zi: &[f64], zj: &[f64]) -> SampleGrad {
    let d_zi: Vec<f64> = zi
        .iter()
        .zip(zj)
        .map(|(a, b)| step.coef * (a - b))
        .collect();
    let d_zj = d_zi.iter().map(|g| -g).collect();
    SampleGrad {
        d_zi,
        d_zj,
        d_q: step.d_q,
        objective_term: step.objective,
    }
}

/// Gradient of the data-edge term for the pair `(z_i, z_j)` with noise
/// density `pn`.
pub fn positive_grad(
    zi: &[f64],
    zj: &[f64],
    q: f64,
    a: f64,
    b: f64,
    pn: f64,
    nu: usize,
) -> SampleGrad {
    let step = positive_step(sq_norm_diff(zi, zj), q, a, b, (nu as f64 * pn).ln());
    expand(step, zi, zj)
}

/// Gradient of the noise-edge term for the pair `(z_i, z_j)`.
pub fn noise_grad(
    zi: &[f64],
    zj: &[f64],
    q: f64,
    a: f64,
    b: f64,
    pn: f64,
    nu: usize,
) -> SampleGrad {
    let step = noise_step(sq_norm_diff(zi, zj), q, a, b, (nu as f64 * pn).ln());
    expand(step, zi, zj)
}

/// Exact expected objective over all ordered pairs:
/// `E_{P_d}[log(pm / (pm + nu pn))] + nu E_{P_n}[log(nu pn / (pm + nu pn))]`.
/// Quadratic in the number of points.
pub fn full_objective(state: &EmbeddingState, graph: &NeighborGraph, h: &Hyperparams) -> f64 {
    objective_and_gradient(state, graph, h.nu, h.a, h.b, false).0
}

/// Exact gradient of [`full_objective`]: coordinate gradient (row-major,
/// same shape as the embedding) and the derivative in `Q`.
pub fn full_objective_gradient(
    state: &EmbeddingState,
    graph: &NeighborGraph,
    h: &Hyperparams,
) -> (Vec<f64>, f64) {
    let (_, g, gq) = objective_and_gradient(state, graph, h.nu, h.a, h.b, true);
    (g, gq)
}

fn objective_and_gradient(
    state: &EmbeddingState,
    graph: &NeighborGraph,
    nu: usize,
    a: f64,
    b: f64,
    with_grad: bool,
) -> (f64, Vec<f64>, f64) {
    let n = state.n_points();
    let m = state.dim();
    let nu_f = nu as f64;
    let mut grad = if with_grad {
        vec![0.0; n * m]
    } else {
        Vec::new()
    };
    let mut grad_q = 0.0;
    let mut total = 0.0;

    let mut apply = |i: usize, j: usize, weight: f64, step: PairStep, grad: &mut Vec<f64>| {
        total += weight * step.objective;
        if with_grad {
            grad_q += weight * step.d_q;
            let (zi, zj) = (state.point(i), state.point(j));
            for c in 0..m {
                let g = weight * step.coef * (zi[c] - zj[c]);
                grad[i * m + c] += g;
                grad[j * m + c] -= g;
            }
        }
    };

    for ((i, j), &pd) in graph.edges().zip(graph.edge_probs()) {
        let d2 = sq_norm_diff(state.point(i), state.point(j));
        let log_nu_pn = (nu_f * graph.noise_prob_from(i)).ln();
        apply(
            i,
            j,
            pd,
            positive_step(d2, state.q, a, b, log_nu_pn),
            &mut grad,
        );
    }
    for i in 0..n {
        let pn = graph.noise_prob_from(i);
        if pn == 0.0 {
            continue;
        }
        let log_nu_pn = (nu_f * pn).ln();
        for j in (0..n).filter(|&j| j != i) {
            let d2 = sq_norm_diff(state.point(i), state.point(j));
            apply(
                i,
                j,
                nu_f * pn,
                noise_step(d2, state.q, a, b, log_nu_pn),
                &mut grad,
            );
        }
    }
    (total, grad, grad_q)
}

/// Total model mass `sum_{i != j} q_ij`.
pub fn total_model_mass(state: &EmbeddingState, a: f64, b: f64) -> f64 {
    let n = state.n_points();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += log_model_prob_sq(sq_norm_diff(state.point(i), state.point(j)), state.q, a, b)
                    .exp();
            }
        }
    }
    s
}
