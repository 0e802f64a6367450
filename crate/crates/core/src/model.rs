//! Input matrix and trainable state, along with the hyperparameters every
//! stage reads.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Dense row-major `N x M` matrix of input vectors.
///
/// Construction rejects non-finite entries and matrices with fewer than two
/// rows, so every downstream stage can assume clean input.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows < 2 {
            return Err(Error::InvalidData(format!(
                "need at least 2 rows, got {rows}"
            )));
        }
        if cols < 1 {
            return Err(Error::InvalidData("need at least 1 column".into()));
        }
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "data",
                expected: rows * cols,
                found: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols + 1,
                col: pos % cols + 1,
            });
        }
        Ok(DataMatrix { rows, cols, values })
    }

    /// Builds a matrix from equally sized rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::InvalidData(format!(
                    "row {} has {} columns, expected {cols}",
                    i + 1,
                    r.len()
                )));
            }
            values.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, values)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Returns a copy with rows reordered so that row `i` of the result is
    /// row `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for &p in perm {
            values.extend_from_slice(self.row(p));
        }
        DataMatrix {
            rows: self.rows,
            cols: self.cols,
            values,
        }
    }
}

/// Embedding coordinates `z_i` (row-major `N x m`) together with the learned
/// normalization parameter `Q`. The model density of a pair is
/// `exp(-Q) / (1 + a * |z_i - z_j|^(2b))`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingState {
    n_points: usize,
    dim: usize,
    coords: Vec<f64>,
    pub q: f64,
}

impl EmbeddingState {
    pub fn new(n_points: usize, dim: usize, coords: Vec<f64>, q: f64) -> Result<Self> {
        if coords.len() != n_points * dim {
            return Err(Error::DimensionMismatch {
                context: "embedding",
                expected: n_points * dim,
                found: coords.len(),
            });
        }
        Ok(EmbeddingState {
            n_points,
            dim,
            coords,
            q,
        })
    }

    pub fn zeros(n_points: usize, dim: usize) -> Self {
        EmbeddingState {
            n_points,
            dim,
            coords: vec![0.0; n_points * dim],
            q: 0.0,
        }
    }

    #[inline]
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn point_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn is_finite(&self) -> bool {
        self.q.is_finite() && self.coords.iter().all(|v| v.is_finite())
    }
}

/// Dissimilarity used for neighbor search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Metric {
    #[default]
    Euclidean,
    Cosine,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Euclidean => "euclidean",
            Metric::Cosine => "cosine",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "cosine" => Ok(Metric::Cosine),
            other => Err(Error::InvalidHyperparam {
                field: "metric",
                reason: format!("must be euclidean or cosine, got {other:?}"),
            }),
        }
    }
}

/// Knobs of the whole pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperparams {
    /// Neighbors per point in the kNN graph.
    pub k: usize,
    /// Output dimension.
    pub dim: usize,
    /// Noise draws per data sample.
    pub nu: usize,
    /// Kernel scale.
    pub a: f64,
    /// Kernel exponent.
    pub b: f64,
    pub n_epochs: usize,
    /// Samples per epoch; `None` means one per input point.
    pub n_samples_per_epoch: Option<usize>,
    /// Initial learning rate, decayed linearly to zero.
    pub lr0: f64,
    pub seed: u64,
    pub n_threads: usize,
    pub metric: Metric,
    /// Per-coordinate bound applied to every sample gradient.
    pub grad_clip: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            k: 15,
            dim: 2,
            nu: 5,
            a: 1.0,
            b: 1.0,
            n_epochs: 50,
            n_samples_per_epoch: None,
            lr0: 1.0,
            seed: 42,
            n_threads: default_threads(),
            metric: Metric::Euclidean,
            grad_clip: 4.0,
        }
    }
}

/// Number of hardware threads, at least one.
pub fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl Hyperparams {
    pub fn samples_per_epoch(&self, n_points: usize) -> usize {
        self.n_samples_per_epoch.unwrap_or(n_points)
    }

    /// Checks every field against its domain for a dataset of `n_points` rows.
    pub fn validate(&self, n_points: usize) -> Result<()> {
        validate_hyperparams(self, n_points)
    }
}

fn bad(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidHyperparam {
        field,
        reason: reason.into(),
    }
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(bad(
            field,
            format!("must be a finite positive number, got {v}"),
        ))
    }
}

pub fn validate_hyperparams(h: &Hyperparams, n_points: usize) -> Result<()> {
    if h.k == 0 {
        return Err(bad("k", "must be ≥ 1"));
    }
    if h.k >= n_points {
        return Err(bad(
            "k",
            format!("must be < N (k = {}, N = {n_points})", h.k),
        ));
    }
    if h.dim == 0 {
        return Err(bad("dim", "must be ≥ 1"));
    }
    if h.nu == 0 {
        return Err(bad("nu", "must be ≥ 1"));
    }
    if h.n_threads == 0 {
        return Err(bad("n_threads", "must be ≥ 1"));
    }
    if h.n_samples_per_epoch == Some(0) {
        return Err(bad("n_samples_per_epoch", "must be ≥ 1"));
    }
    positive("a", h.a)?;
    positive("b", h.b)?;
    positive("lr0", h.lr0)?;
    positive("grad_clip", h.grad_clip)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_values() {
        let h = Hyperparams::default();
        assert_eq!((h.k, h.n_epochs, h.dim, h.nu), (15, 50, 2, 5));
        assert_eq!(h.samples_per_epoch(5620), 5620);
        assert!(validate_hyperparams(&h, 5620).is_ok());
    }

    #[test]
    fn k_zero_rejected() {
        let h = Hyperparams {
            k: 0,
            ..Default::default()
        };
        let err = validate_hyperparams(&h, 100).unwrap_err().to_string();
        assert!(err.contains("k must be ≥ 1"), "{err}");
    }

    #[test]
    fn k_equal_to_n_rejected() {
        let h = Hyperparams {
            k: 10,
            ..Default::default()
        };
        let err = validate_hyperparams(&h, 10).unwrap_err().to_string();
        assert!(err.contains("k must be < N"), "{err}");
    }

    #[test]
    fn nonpositive_reals_name_their_field() {
        for (field, h) in [
            (
                "a",
                Hyperparams {
                    a: 0.0,
                    ..Default::default()
                },
            ),
            (
                "b",
                Hyperparams {
                    b: -1.0,
                    ..Default::default()
                },
            ),
            (
                "lr0",
                Hyperparams {
                    lr0: f64::NAN,
                    ..Default::default()
                },
            ),
            (
                "grad_clip",
                Hyperparams {
                    grad_clip: 0.0,
                    ..Default::default()
                },
            ),
            (
                "nu",
                Hyperparams {
                    nu: 0,
                    ..Default::default()
                },
            ),
            (
                "dim",
                Hyperparams {
                    dim: 0,
                    ..Default::default()
                },
            ),
        ] {
            let err = validate_hyperparams(&h, 100).unwrap_err().to_string();
            assert!(err.contains(field), "{field}: {err}");
        }
    }

    #[test]
    fn data_matrix_rejects_non_finite() {
        let err = DataMatrix::new(2, 2, vec![1.0, 2.0, f64::INFINITY, 0.0]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 2, col: 1 }));
        assert!(DataMatrix::new(1, 2, vec![1.0, 2.0]).is_err());
        assert!(DataMatrix::new(2, 0, vec![]).is_err());
    }

    #[test]
    fn metric_parses() {
        assert_eq!("cosine".parse::<Metric>().unwrap(), Metric::Cosine);
        assert!("manhattan".parse::<Metric>().is_err());
    }
}
