//! Stochastic gradient ascent on the noise-contrastive objective.
//!
//! Each iteration draws one data edge and `nu` noise edges and evaluates all
//! their gradients at the current parameters; the coordinate-wise clipped
//! gradients then make one ascent step. With several workers the per-epoch sample budget is
//! split between them and all of them read and write the shared coordinates
//! and `Q` without locking. Each sample touches two points out of `N`, so
//! conflicting writes are rare; lost updates are tolerated. Epochs are
//! separated by a join so every worker uses the same learning rate.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::EdgeSampler;
use crate::model::{EmbeddingState, Hyperparams};
use crate::nce::{noise_step, positive_step, sq_norm_diff, PairStep};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub samples_processed: u64,
    pub final_q: f64,
    pub wall_time: Duration,
    /// Per-epoch average of the sampled objective (data term plus the `nu`
    /// noise terms), from samples already drawn for training.
    pub objective_trace: Vec<f64>,
}

/// What the progress callback sees at the end of every epoch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochProgress {
    pub epoch: usize,
    pub learning_rate: f64,
    pub objective_estimate: f64,
}

/// Linearly decaying learning rate, `lr0 * (1 - epoch / n_epochs)`.
pub fn lr_schedule(epoch: usize, n_epochs: usize, lr0: f64) -> f64 {
    debug_assert!(epoch < n_epochs);
    lr0 * (1.0 - epoch as f64 / n_epochs as f64)
}

#[inline]
pub fn clip(g: f64, c: f64) -> f64 {
    g.max(-c).min(c)
}

/// `f64` cells shared between workers without locks. Relaxed atomics keep
/// the races well-defined while compiling to plain loads and stores.
struct SharedParams {
    coords: Vec<AtomicU64>,
    q: AtomicU64,
}

impl SharedParams {
    fn new(state: &EmbeddingState) -> Self {
        SharedParams {
            coords: state
                .coords()
                .iter()
                .map(|v| AtomicU64::new(v.to_bits()))
                .collect(),
            q: AtomicU64::new(state.q.to_bits()),
        }
    }

    #[inline]
    fn get(&self, idx: usize) -> f64 {
        f64::from_bits(self.coords[idx].load(Ordering::Relaxed))
    }

    #[inline]
    fn add(&self, idx: usize, delta: f64) {
        let cell = &self.coords[idx];
        let v = f64::from_bits(cell.load(Ordering::Relaxed));
        cell.store((v + delta).to_bits(), Ordering::Relaxed);
    }

    #[inline]
    fn q(&self) -> f64 {
        f64::from_bits(self.q.load(Ordering::Relaxed))
    }

    #[inline]
    fn add_q(&self, delta: f64) {
        let v = self.q();
        self.q.store((v + delta).to_bits(), Ordering::Relaxed);
    }

    fn write_back(&self, state: &mut EmbeddingState) {
        for (dst, src) in state.coords_mut().iter_mut().zip(&self.coords) {
            *dst = f64::from_bits(src.load(Ordering::Relaxed));
        }
        state.q = self.q();
    }

    fn all_finite(&self) -> bool {
        self.q().is_finite()
            && self
                .coords
                .iter()
                .all(|c| f64::from_bits(c.load(Ordering::Relaxed)).is_finite())
    }
}

struct Worker<'a> {
    params: &'a SharedParams,
    sampler: &'a EdgeSampler<'a>,
    dim: usize,
    nu: usize,
    /// `log(nu * p_n(i, .))` for every source `i`.
    log_nu_pn: &'a [f64],
    a: f64,
    b: f64,
    clip: f64,
    /// Endpoints and clipped coordinate gradients of the current iteration.
    pairs: Vec<(usize, usize)>,
    grads: Vec<f64>,
    zi: Vec<f64>,
    zj: Vec<f64>,
}

impl<'a> Worker<'a> {
    fn new(
        params: &'a SharedParams,
        sampler: &'a EdgeSampler<'a>,
        log_nu_pn: &'a [f64],
        dim: usize,
        h: &Hyperparams,
    ) -> Self {
        Worker {
            params,
            sampler,
            dim,
            nu: h.nu,
            log_nu_pn,
            a: h.a,
            b: h.b,
            clip: h.grad_clip,
            pairs: Vec::with_capacity(h.nu + 1),
            grads: vec![0.0; (h.nu + 1) * dim],
            zi: vec![0.0; dim],
            zj: vec![0.0; dim],
        }
    }

    /// Evaluates one pair at the current parameters and stores its clipped
    /// gradient in slot `slot`; returns the clipped `Q` derivative and the
    /// objective term.
    #[inline]
    fn evaluate(&mut self, slot: usize, i: usize, j: usize, q: f64, positive: bool) -> (f64, f64) {
        let m = self.dim;
        for c in 0..m {
            self.zi[c] = self.params.get(i * m + c);
            self.zj[c] = self.params.get(j * m + c);
        }
        let d2 = sq_norm_diff(&self.zi, &self.zj);
        let log_nu_pn = self.log_nu_pn[i];
        let PairStep {
            coef,
            d_q,
            objective,
        } = if positive {
            positive_step(d2, q, self.a, self.b, log_nu_pn)
        } else {
            noise_step(d2, q, self.a, self.b, log_nu_pn)
        };
        let out = &mut self.grads[slot * m..(slot + 1) * m];
        for ((o, a), b) in out.iter_mut().zip(&self.zi).zip(&self.zj) {
            *o = clip(coef * (a - b), self.clip);
        }
        self.pairs.push((i, j));
        (clip(d_q, self.clip), objective)
    }

    /// Runs `n_samples` iterations; returns the summed sampled objective.
    fn run(&mut self, rng: &mut ChaCha8Rng, n_samples: usize, lr: f64) -> f64 {
        let m = self.dim;
        let mut objective = 0.0;
        for _ in 0..n_samples {
            self.pairs.clear();
            let q = self.params.q();
            let (i, j) = self.sampler.sample_data_edge(rng);
            let (mut dq, mut obj) = self.evaluate(0, i, j, q, true);
            for slot in 1..=self.nu {
                let (i, j) = self.sampler.sample_noise_edge(rng);
                let (d, o) = self.evaluate(slot, i, j, q, false);
                dq += d;
                obj += o;
            }
            for (slot, &(i, j)) in self.pairs.iter().enumerate() {
                let g = &self.grads[slot * m..(slot + 1) * m];
                for (c, &gc) in g.iter().enumerate() {
                    let step = lr * gc;
                    self.params.add(i * m + c, step);
                    self.params.add(j * m + c, -step);
                }
            }
            self.params.add_q(lr * dq);
            objective += obj;
        }
        objective
    }
}

fn worker_rng(seed: u64, epoch: usize, worker: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((epoch as u64) << 20) | worker as u64);
    rng
}

/// Trains `state` in place. With `n_threads == 1` the result is a pure
/// function of the inputs and the seed.
pub fn train(
    state: &mut EmbeddingState,
    sampler: &EdgeSampler<'_>,
    h: &Hyperparams,
) -> Result<TrainReport> {
    train_with_progress(state, sampler, h, |_| {})
}

pub fn train_with_progress(
    state: &mut EmbeddingState,
    sampler: &EdgeSampler<'_>,
    h: &Hyperparams,
    mut progress: impl FnMut(EpochProgress),
) -> Result<TrainReport> {
    let n = state.n_points();
    h.validate(n)?;
    if sampler.n_points() != n {
        return Err(Error::DimensionMismatch {
            context: "optimizer",
            expected: n,
            found: sampler.n_points(),
        });
    }
    let started = Instant::now();
    let dim = state.dim();
    let per_epoch = h.samples_per_epoch(n);
    let n_threads = h.n_threads.min(per_epoch).max(1);
    let params = SharedParams::new(state);
    let log_nu = (h.nu as f64).ln();
    let graph = sampler.graph();
    let log_nu_pn: Vec<f64> = (0..n)
        .map(|i| log_nu + graph.noise_prob_from(i).ln())
        .collect();
    let log_nu_pn = log_nu_pn.as_slice();
    let mut report = TrainReport::default();

    for epoch in 0..h.n_epochs {
        let lr = lr_schedule(epoch, h.n_epochs, h.lr0);
        let objective_sum = if n_threads == 1 {
            let mut rng = worker_rng(h.seed, epoch, 0);
            Worker::new(&params, sampler, log_nu_pn, dim, h).run(&mut rng, per_epoch, lr)
        } else {
            let params = &params;
            std::thread::scope(|scope| {
                let handles: Vec<_> = (0..n_threads)
                    .map(|w| {
                        let share = per_epoch / n_threads + usize::from(w < per_epoch % n_threads);
                        scope.spawn(move || {
                            let mut rng = worker_rng(h.seed, epoch, w);
                            Worker::new(params, sampler, log_nu_pn, dim, h).run(&mut rng, share, lr)
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|hd| hd.join().expect("optimizer worker panicked"))
                    .sum::<f64>()
            })
        };
        if !params.all_finite() {
            return Err(Error::Diverged { epoch });
        }
        let estimate = objective_sum / per_epoch as f64;
        report.objective_trace.push(estimate);
        report.epochs_run += 1;
        report.samples_processed += per_epoch as u64;
        progress(EpochProgress {
            epoch,
            learning_rate: lr,
            objective_estimate: estimate,
        });
    }

    params.write_back(state);
    report.final_q = state.q;
    report.wall_time = started.elapsed();
    Ok(report)
}
