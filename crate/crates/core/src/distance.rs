//! Dissimilarities between input vectors. Only non-negativity and symmetry
//! are relied upon; neither function needs to be a metric.

use crate::error::{Error, Result};
use crate::model::Metric;

fn check_len(u: &[f64], v: &[f64]) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            context: "distance",
            expected: u.len(),
            found: v.len(),
        });
    }
    Ok(())
}

/// Squared Euclidean distance.
pub fn euclidean_sq(u: &[f64], v: &[f64]) -> Result<f64> {
    check_len(u, v)?;
    Ok(sq_dist(u, v))
}

/// `1 - cos(u, v)`, in `[0, 2]`. A zero-norm input is at distance 1 from
/// everything.
pub fn cosine_dist(u: &[f64], v: &[f64]) -> Result<f64> {
    check_len(u, v)?;
    Ok(cosine_with_norms(u, v, norm(u), norm(v)))
}

// Four independent accumulators let the compiler vectorize these loops; a
// single running sum is a serial dependency chain.
#[inline]
pub(crate) fn sq_dist(u: &[f64], v: &[f64]) -> f64 {
    lanes(u, v, |a, b| (a - b) * (a - b))
}

#[inline]
pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    lanes(u, v, |a, b| a * b)
}

#[inline(always)]
fn lanes(u: &[f64], v: &[f64], f: impl Fn(f64, f64) -> f64) -> f64 {
    let (uc, vc) = (u.chunks_exact(4), v.chunks_exact(4));
    let tail: f64 = uc
        .remainder()
        .iter()
        .zip(vc.remainder())
        .map(|(&a, &b)| f(a, b))
        .sum();
    let mut acc = [0.0; 4];
    for (a, b) in uc.zip(vc) {
        for l in 0..4 {
            acc[l] += f(a[l], b[l]);
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub(crate) fn sq_dist_f32(u: &[f32], v: &[f32]) -> f32 {
    lanes_f32(u, v, |a, b| (a - b) * (a - b))
}

#[inline]
pub(crate) fn dot_f32(u: &[f32], v: &[f32]) -> f32 {
    lanes_f32(u, v, |a, b| a * b)
}

#[inline(always)]
fn lanes_f32(u: &[f32], v: &[f32], f: impl Fn(f32, f32) -> f32) -> f32 {
    let (uc, vc) = (u.chunks_exact(8), v.chunks_exact(8));
    let tail: f32 = uc
        .remainder()
        .iter()
        .zip(vc.remainder())
        .map(|(&a, &b)| f(a, b))
        .sum();
    let mut acc = [0.0f32; 8];
    for (a, b) in uc.zip(vc) {
        for l in 0..8 {
            acc[l] += f(a[l], b[l]);
        }
    }
    acc.iter().sum::<f32>() + tail
}

#[inline]
pub(crate) fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

#[inline]
pub(crate) fn cosine_with_norms(u: &[f64], v: &[f64], nu: f64, nv: f64) -> f64 {
    if nu == 0.0 || nv == 0.0 {
        return 1.0;
    }
    (1.0 - dot(u, v) / (nu * nv)).clamp(0.0, 2.0)
}

/// Distance under `metric`, assuming equal lengths.
#[inline]
pub fn distance(metric: Metric, u: &[f64], v: &[f64]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    match metric {
        Metric::Euclidean => sq_dist(u, v),
        Metric::Cosine => cosine_with_norms(u, v, norm(u), norm(v)),
    }
}
