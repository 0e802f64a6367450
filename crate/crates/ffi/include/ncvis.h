#ifndef NCVIS_H
#define NCVIS_H

/* Generated by cbindgen from crates/ffi. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NcvisMetric {
  NCVIS_METRIC_EUCLIDEAN = 0,
  NCVIS_METRIC_COSINE = 1,
} NcvisMetric;

typedef enum NcvisInit {
  NCVIS_INIT_SPECTRAL = 0,
  NCVIS_INIT_RANDOM = 1,
} NcvisInit;

// Result code of every fallible call.
typedef enum NcvisStatus {
  NCVIS_STATUS_OK = 0,
  NCVIS_STATUS_NULL_POINTER = 1,
  NCVIS_STATUS_INVALID_ARGUMENT = 2,
  NCVIS_STATUS_NON_FINITE = 3,
  NCVIS_STATUS_IO = 4,
  NCVIS_STATUS_DIVERGED = 5,
  NCVIS_STATUS_PANIC = 6,
} NcvisStatus;

// Opaque result of a successful `ncvis_embed`.
typedef struct NcvisEmbedding NcvisEmbedding;

// Pipeline settings. Start from `ncvis_params_default()` and override.
typedef struct NcvisParams {
  size_t k;
  size_t dim;
  size_t nu;
  double a;
  double b;
  size_t n_epochs;
  // Samples per epoch; 0 means one per input point.
  size_t n_samples;
  double learning_rate;
  double grad_clip;
  uint64_t seed;
  // Worker threads; 0 means all available cores.
  size_t n_threads;
  enum NcvisMetric metric;
  enum NcvisInit init;
} NcvisParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Default settings: 15 neighbors, 2 output dimensions, 5 noise samples,
// `a = b = 1`, 50 epochs, learning rate 1, seed 42, all cores.
struct NcvisParams ncvis_params_default(void);

// Embeds `n_rows x n_cols` row-major doubles. On success `*out` receives a
// handle owned by the caller.
//
// # Safety
// `data` must point to `n_rows * n_cols` readable doubles, `params` to a
// valid `NcvisParams` (or be null for defaults) and `out` to writable
// storage for one pointer.
enum NcvisStatus ncvis_embed(const double *data,
                             size_t n_rows,
                             size_t n_cols,
                             const struct NcvisParams *params,
                             struct NcvisEmbedding **out);

// Number of embedded points, 0 for a null handle.
//
// # Safety
// `emb` must be null or a live handle from `ncvis_embed`.
size_t ncvis_embedding_n_points(const struct NcvisEmbedding *emb);

// Output dimension, 0 for a null handle.
//
// # Safety
// `emb` must be null or a live handle from `ncvis_embed`.
size_t ncvis_embedding_dim(const struct NcvisEmbedding *emb);

// Learned normalizer `Q`; NaN for a null handle.
//
// # Safety
// `emb` must be null or a live handle from `ncvis_embed`.
double ncvis_embedding_q(const struct NcvisEmbedding *emb);

// Wall time of the training stage in seconds; NaN for a null handle.
//
// # Safety
// `emb` must be null or a live handle from `ncvis_embed`.
double ncvis_embedding_train_seconds(const struct NcvisEmbedding *emb);

// Borrowed pointer to the `n_points x dim` row-major coordinates, valid
// until the handle is freed.
//
// # Safety
// `emb` must be null or a live handle from `ncvis_embed`.
const double *ncvis_embedding_coords(const struct NcvisEmbedding *emb);

// Copies the coordinates into `dst`, which must hold `len` doubles with
// `len == n_points * dim`.
//
// # Safety
// `emb` must be a live handle and `dst` must point to `len` writable doubles.
enum NcvisStatus ncvis_embedding_copy(const struct NcvisEmbedding *emb, double *dst, size_t len);

// Releases a handle. Null is ignored.
//
// # Safety
// `emb` must be null or a handle from `ncvis_embed` not yet freed.
void ncvis_embedding_free(struct NcvisEmbedding *emb);

// Message for the last failed call on this thread, or null. The pointer is
// valid until the next ncvis call on the same thread.
const char *ncvis_last_error(void);

// Library version as a static NUL-terminated string.
const char *ncvis_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NCVIS_H */
