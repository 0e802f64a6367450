//! C ABI for the ncvis pipeline.
//!
//! Results live behind an opaque `NcvisEmbedding` handle that the caller
//! releases with [`ncvis_embedding_free`]. Every fallible call returns an
//! [`NcvisStatus`]; on failure [`ncvis_last_error`] describes what went wrong
//! on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ncvis::model::default_threads;
use ncvis::{DataMatrix, EmbeddingState, Error, Hyperparams, InitMethod, Metric, PipelineConfig};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NcvisStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NonFinite = 3,
    Io = 4,
    Diverged = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NcvisMetric {
    Euclidean = 0,
    Cosine = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NcvisInit {
    Spectral = 0,
    Random = 1,
}

/// Pipeline settings. Start from `ncvis_params_default()` and override.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NcvisParams {
    pub k: usize,
    pub dim: usize,
    pub nu: usize,
    pub a: f64,
    pub b: f64,
    pub n_epochs: usize,
    /// Samples per epoch; 0 means one per input point.
    pub n_samples: usize,
    pub learning_rate: f64,
    pub grad_clip: f64,
    pub seed: u64,
    /// Worker threads; 0 means all available cores.
    pub n_threads: usize,
    pub metric: NcvisMetric,
    pub init: NcvisInit,
}

/// Opaque result of a successful `ncvis_embed`.
pub struct NcvisEmbedding {
    state: EmbeddingState,
    final_q: f64,
    train_seconds: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> NcvisStatus {
    match err {
        Error::NonFinite { .. } | Error::NonFiniteValue { .. } => NcvisStatus::NonFinite,
        Error::Diverged { .. } => NcvisStatus::Diverged,
        Error::Io { .. }
        | Error::Format { .. }
        | Error::RaggedRow { .. }
        | Error::ParseValue { .. }
        | Error::Empty { .. }
        | Error::Truncated { .. } => NcvisStatus::Io,
        _ => NcvisStatus::InvalidArgument,
    }
}

/// Runs `f`, converting panics into `NcvisStatus::Panic`.
fn guard(f: impl FnOnce() -> NcvisStatus) -> NcvisStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            NcvisStatus::Panic
        }
    }
}

impl From<&NcvisParams> for PipelineConfig {
    fn from(p: &NcvisParams) -> Self {
        PipelineConfig {
            hyper: Hyperparams {
                k: p.k,
                dim: p.dim,
                nu: p.nu,
                a: p.a,
                b: p.b,
                n_epochs: p.n_epochs,
                n_samples_per_epoch: (p.n_samples > 0).then_some(p.n_samples),
                lr0: p.learning_rate,
                seed: p.seed,
                n_threads: if p.n_threads == 0 {
                    default_threads()
                } else {
                    p.n_threads
                },
                metric: match p.metric {
                    NcvisMetric::Euclidean => Metric::Euclidean,
                    NcvisMetric::Cosine => Metric::Cosine,
                },
                grad_clip: p.grad_clip,
            },
            init: match p.init {
                NcvisInit::Spectral => InitMethod::Spectral,
                NcvisInit::Random => InitMethod::Random,
            },
            ..PipelineConfig::default()
        }
    }
}

/// Default settings: 15 neighbors, 2 output dimensions, 5 noise samples,
/// `a = b = 1`, 50 epochs, learning rate 1, seed 42, all cores.
#[no_mangle]
pub extern "C" fn ncvis_params_default() -> NcvisParams {
    let h = Hyperparams::default();
    NcvisParams {
        k: h.k,
        dim: h.dim,
        nu: h.nu,
        a: h.a,
        b: h.b,
        n_epochs: h.n_epochs,
        n_samples: 0,
        learning_rate: h.lr0,
        grad_clip: h.grad_clip,
        seed: h.seed,
        n_threads: 0,
        metric: NcvisMetric::Euclidean,
        init: NcvisInit::Spectral,
    }
}

/// Embeds `n_rows x n_cols` row-major doubles. On success `*out` receives a
/// handle owned by the caller.
///
/// # Safety
/// `data` must point to `n_rows * n_cols` readable doubles, `params` to a
/// valid `NcvisParams` (or be null for defaults) and `out` to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn ncvis_embed(
    data: *const f64,
    n_rows: usize,
    n_cols: usize,
    params: *const NcvisParams,
    out: *mut *mut NcvisEmbedding,
) -> NcvisStatus {
    guard(|| {
        if out.is_null() || data.is_null() {
            set_error("data and out must not be null");
            return NcvisStatus::NullPointer;
        }
        *out = ptr::null_mut();
        let Some(len) = n_rows.checked_mul(n_cols) else {
            set_error("n_rows * n_cols overflows");
            return NcvisStatus::InvalidArgument;
        };
        let values = std::slice::from_raw_parts(data, len).to_vec();
        let params = if params.is_null() {
            ncvis_params_default()
        } else {
            *params
        };
        let result = DataMatrix::new(n_rows, n_cols, values)
            .and_then(|m| ncvis::embed(&m, &PipelineConfig::from(&params)));
        match result {
            Ok(r) => {
                *out = Box::into_raw(Box::new(NcvisEmbedding {
                    final_q: r.report.final_q,
                    train_seconds: r.timings.train.as_secs_f64(),
                    state: r.embedding,
                }));
                NcvisStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Number of embedded points, 0 for a null handle.
///
/// # Safety
/// `emb` must be null or a live handle from `ncvis_embed`.
#[no_mangle]
pub unsafe extern "C" fn ncvis_embedding_n_points(emb: *const NcvisEmbedding) -> usize {
    emb.as_ref().map_or(0, |e| e.state.n_points())
}

/// Output dimension, 0 for a null handle.
///
/// # Safety
/// `emb` must be null or a live handle from `ncvis_embed`.
#[no_mangle]
pub unsafe extern "C" fn ncvis_embedding_dim(emb: *const NcvisEmbedding) -> usize {
    emb.as_ref().map_or(0, |e| e.state.dim())
}

/// Learned normalizer `Q`; NaN for a null handle.
///
/// # Safety
/// `emb` must be null or a live handle from `ncvis_embed`.
#[no_mangle]
pub unsafe extern "C" fn ncvis_embedding_q(emb: *const NcvisEmbedding) -> f64 {
    emb.as_ref().map_or(f64::NAN, |e| e.final_q)
}

/// Wall time of the training stage in seconds; NaN for a null handle.
///
/// # Safety
/// `emb` must be null or a live handle from `ncvis_embed`.
#[no_mangle]
pub unsafe extern "C" fn ncvis_embedding_train_seconds(emb: *const NcvisEmbedding) -> f64 {
    emb.as_ref().map_or(f64::NAN, |e| e.train_seconds)
}

/// Borrowed pointer to the `n_points x dim` row-major coordinates, valid
/// until the handle is freed.
///
/// # Safety
/// `emb` must be null or a live handle from `ncvis_embed`.
#[no_mangle]
pub unsafe extern "C" fn ncvis_embedding_coords(emb: *const NcvisEmbedding) -> *const f64 {
    emb.as_ref()
        .map_or(ptr::null(), |e| e.state.coords().as_ptr())
}

/// Copies the coordinates into `dst`, which must hold `len` doubles with
/// `len == n_points * dim`.
///
/// # Safety
/// `emb` must be a live handle and `dst` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ncvis_embedding_copy(
    emb: *const NcvisEmbedding,
    dst: *mut f64,
    len: usize,
) -> NcvisStatus {
    guard(|| {
        let Some(e) = emb.as_ref() else {
            set_error("embedding handle is null");
            return NcvisStatus::NullPointer;
        };
        if dst.is_null() {
            set_error("destination is null");
            return NcvisStatus::NullPointer;
        }
        let src = e.state.coords();
        if len != src.len() {
            set_error(format!(
                "destination holds {len} values, need {}",
                src.len()
            ));
            return NcvisStatus::InvalidArgument;
        }
        ptr::copy_nonoverlapping(src.as_ptr(), dst, len);
        NcvisStatus::Ok
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `emb` must be null or a handle from `ncvis_embed` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ncvis_embedding_free(emb: *mut NcvisEmbedding) {
    if !emb.is_null() {
        drop(Box::from_raw(emb));
    }
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next ncvis call on the same thread.
#[no_mangle]
pub extern "C" fn ncvis_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ncvis_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
