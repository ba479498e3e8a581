/* tg: parameter-trajectory toolkit, C interface.
 *
 * Checkpoints and trajectories are opaque handles created and destroyed by
 * this library. Every fallible function returns a tg_status; TG_OK means
 * success and anything else leaves a human-readable explanation in
 * tg_last_error() (thread-local). Output handles are written only on
 * success and must be released with the matching *_free function.
 */
#ifndef TG_H
#define TG_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define TG_API __declspec(dllexport)
#else
#define TG_API __attribute__((visibility("default")))
#endif

typedef struct tg_checkpoint tg_checkpoint;
typedef struct tg_trajectory tg_trajectory;

typedef enum tg_dtype { TG_DTYPE_F32 = 0, TG_DTYPE_F64 = 1 } tg_dtype;

typedef enum tg_status {
  TG_OK = 0,
  TG_ERR_INVALID_ARGUMENT = 1,
  TG_ERR_FORMAT = 2,
  TG_ERR_NON_FINITE = 3,
  TG_ERR_LAYOUT_MISMATCH = 4,
  TG_ERR_CONGRUENCE = 5,
  TG_ERR_WEIGHTS = 6,
  TG_ERR_EMPTY_TRAJECTORY = 7,
  TG_ERR_INSUFFICIENT_HISTORY = 8,
  TG_ERR_EMPTY_HISTORY = 9,
  TG_ERR_ALL_CANDIDATES_FAILED = 10,
  TG_ERR_EMPTY_MATRIX = 11,
  TG_ERR_MISSING_ROW = 12,
  TG_ERR_DEGENERATE_TRAJECTORY = 13,
  TG_ERR_RANK_DEFICIENT = 14,
  TG_ERR_DIVERGENCE = 15,
  TG_ERR_BAD_PERMUTATION = 16,
  TG_ERR_IO = 17,
  TG_ERR_MANIFEST = 18,
  TG_ERR_UNKNOWN = 19
} tg_status;

TG_API const char* tg_version(void);

/* Message for the most recent failure on this thread; never NULL. */
TG_API const char* tg_last_error(void);

/* ---- checkpoints ------------------------------------------------------- */

/* Builds a checkpoint from flat arrays. dims holds every tensor's shape
 * back-to-back (ranks[i] entries each); values holds every tensor's elements
 * back-to-back, row-major. Values are validated (finite, snapped to dtype). */
TG_API tg_status tg_checkpoint_create(const char* const* names,
                                      const size_t* ranks, const uint64_t* dims,
                                      const double* values, size_t n_tensors,
                                      tg_dtype dtype, int64_t timestamp,
                                      tg_checkpoint** out);

/* Reads a TGCK v1 file; the container stores no timestamp, so one is given. */
TG_API tg_status tg_checkpoint_load(const char* path, int64_t timestamp,
                                    tg_checkpoint** out);
TG_API tg_status tg_checkpoint_save(const tg_checkpoint* c, const char* path);
TG_API void tg_checkpoint_free(tg_checkpoint* c);

TG_API tg_status tg_checkpoint_timestamp(const tg_checkpoint* c, int64_t* out);
TG_API tg_status tg_checkpoint_dtype(const tg_checkpoint* c, tg_dtype* out);
TG_API tg_status tg_checkpoint_tensor_count(const tg_checkpoint* c, size_t* out);
/* Borrowed pointer, valid while the checkpoint lives. */
TG_API tg_status tg_checkpoint_tensor_name(const tg_checkpoint* c, size_t index,
                                           const char** out);
TG_API tg_status tg_checkpoint_tensor_size(const tg_checkpoint* c, size_t index,
                                           size_t* out);
TG_API tg_status tg_checkpoint_tensor_rank(const tg_checkpoint* c, size_t index,
                                           size_t* out);
/* Copies the tensor's dims; capacity must cover the rank. */
TG_API tg_status tg_checkpoint_tensor_dims(const tg_checkpoint* c, size_t index,
                                           uint64_t* out, size_t capacity);
/* Copies the tensor's values (row-major) into caller-owned storage. */
TG_API tg_status tg_checkpoint_tensor_values(const tg_checkpoint* c, size_t index,
                                             double* out, size_t capacity);
TG_API tg_status tg_checkpoint_l2_norm(const tg_checkpoint* c, double* out);
/* 1 when bitwise equal (tensors, timestamp, dtype), else 0. */
TG_API tg_status tg_checkpoint_equal(const tg_checkpoint* a, const tg_checkpoint* b,
                                     int* out);

/* ---- trajectories ------------------------------------------------------ */

TG_API tg_status tg_trajectory_load(const char* manifest_path, tg_trajectory** out);
TG_API tg_status tg_trajectory_save(const tg_trajectory* traj, const char* dir);
TG_API void tg_trajectory_free(tg_trajectory* traj);
TG_API tg_status tg_trajectory_length(const tg_trajectory* traj, size_t* out);
TG_API tg_status tg_trajectory_step(const tg_trajectory* traj, int64_t* out);
/* Copies checkpoint `index`; the caller owns and frees the copy. */
TG_API tg_status tg_trajectory_checkpoint(const tg_trajectory* traj, size_t index,
                                          tg_checkpoint** out);

/* ---- estimation methods ------------------------------------------------ */

TG_API tg_status tg_recent(const tg_trajectory* traj, tg_checkpoint** out);
/* alphas has length n+1; slot 0 weighs the implicit zero vector. */
TG_API tg_status tg_merge(const tg_trajectory* traj, const double* alphas,
                          size_t n_alphas, tg_checkpoint** out);
TG_API tg_status tg_merge_uniform(const tg_trajectory* traj, tg_checkpoint** out);
TG_API tg_status tg_merge_ema(const tg_trajectory* traj, double decay,
                              tg_checkpoint** out);
TG_API tg_status tg_downscale(const tg_checkpoint* c, double alpha,
                              tg_checkpoint** out);
TG_API tg_status tg_taylor_step(const tg_trajectory* traj, double alpha,
                                int lookback, tg_checkpoint** out);
TG_API tg_status tg_taylor_order2(const tg_trajectory* traj, double alpha,
                                  int lookback, tg_checkpoint** out);

typedef struct tg_learned_config {
  double lambda;
  int horizon;
  double lr;
  int max_iters;
  double tol;
  double eps;
  uint64_t seed;
} tg_learned_config;

TG_API void tg_learned_config_default(tg_learned_config* cfg);

/* Fits the global-offset change model. `converged` may be NULL. */
TG_API tg_status tg_fit_learned_offset(const tg_trajectory* traj,
                                       const tg_learned_config* cfg,
                                       tg_checkpoint** offset, int* converged);
TG_API tg_status tg_fit_learned_coeff(const tg_trajectory* traj,
                                      const tg_learned_config* cfg,
                                      tg_checkpoint** offset, double* alpha,
                                      double* beta, int* converged);
/* use_coeff == 0 ignores alpha/beta/delta and adds the bare offset. */
TG_API tg_status tg_apply_learned(const tg_checkpoint* last,
                                  const tg_checkpoint* offset, int use_coeff,
                                  double alpha, double beta, int64_t delta,
                                  tg_checkpoint** out);

/* ---- leak-free tuning --------------------------------------------------- */

typedef enum tg_method_kind {
  TG_METHOD_DOWNSCALE = 0,
  TG_METHOD_TAYLOR = 1,
  TG_METHOD_EMA = 2
} tg_method_kind;

typedef enum tg_space_kind { TG_SPACE_GRID = 0, TG_SPACE_RANDOM = 1 } tg_space_kind;

typedef struct tg_search_space {
  tg_space_kind kind;
  double lo;
  double hi;
  int count;
  uint64_t seed;
} tg_search_space;

/* Scores one candidate (lower is better); return NaN to mark it failed. */
typedef double (*tg_eval_fn)(const tg_checkpoint* candidate, void* user);

/* Candidates are built from `history` alone and scored by the callback.
 * Optionally copies the per-candidate score table into alphas/scores
 * (capacity entries each; the table length is space->count). */
TG_API tg_status tg_select_alpha(const tg_trajectory* history,
                                 tg_method_kind method, int lookback,
                                 const tg_search_space* space, tg_eval_fn eval,
                                 void* user, double* alpha_star, double* alphas,
                                 double* scores, size_t capacity);

/* ---- command-level entry points ----------------------------------------- */

TG_API tg_status tg_run_experiment(const char* manifest_path, int oracle_future,
                                   int threads);

typedef struct tg_synth_options {
  int dim;
  int t_count;
  double noise_sigma;
  int n_train;
  int n_val;
  int n_test;
  uint64_t seed;
  /* NULL for the seeded defaults; otherwise arrays of length dim. */
  const double* coeff_a;
  const double* coeff_b;
  const double* coeff_c;
  const double* coeff_d;
  int learner_mlp; /* 0 = ols, 1 = mlp */
  int hidden;
  double init_scale;
  int loss_cross_entropy; /* 0 = mse */
  double lr;
  int iters;
  int batch;
  int init_from_base; /* 0 = from_previous */
} tg_synth_options;

TG_API void tg_synth_options_default(tg_synth_options* opts);
TG_API tg_status tg_synth(const tg_synth_options* opts, const char* out_dir);

TG_API tg_status tg_figures(const char* results_dir);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* TG_H */
