#include "tg.h"

#include <algorithm>
#include <cstring>
#include <string>

#include "tg/checkpoint.hpp"
#include "tg/extrap.hpp"
#include "tg/interp.hpp"
#include "tg/runner.hpp"
#include "tg/tuning.hpp"

struct tg_checkpoint {
  tg::Checkpoint value;
};

struct tg_trajectory {
  tg::Trajectory value;
};

namespace {

thread_local std::string g_last_error;

tg_status code_of(tg::Errc code) {
  using tg::Errc;
  switch (code) {
    case Errc::invalid_argument: return TG_ERR_INVALID_ARGUMENT;
    case Errc::format_error: return TG_ERR_FORMAT;
    case Errc::non_finite: return TG_ERR_NON_FINITE;
    case Errc::layout_mismatch: return TG_ERR_LAYOUT_MISMATCH;
    case Errc::congruence_error: return TG_ERR_CONGRUENCE;
    case Errc::weight_error: return TG_ERR_WEIGHTS;
    case Errc::empty_trajectory: return TG_ERR_EMPTY_TRAJECTORY;
    case Errc::insufficient_history: return TG_ERR_INSUFFICIENT_HISTORY;
    case Errc::empty_history: return TG_ERR_EMPTY_HISTORY;
    case Errc::all_candidates_failed: return TG_ERR_ALL_CANDIDATES_FAILED;
    case Errc::empty_matrix: return TG_ERR_EMPTY_MATRIX;
    case Errc::missing_row: return TG_ERR_MISSING_ROW;
    case Errc::degenerate_trajectory: return TG_ERR_DEGENERATE_TRAJECTORY;
    case Errc::rank_deficient: return TG_ERR_RANK_DEFICIENT;
    case Errc::divergence: return TG_ERR_DIVERGENCE;
    case Errc::bad_permutation: return TG_ERR_BAD_PERMUTATION;
    case Errc::io_error: return TG_ERR_IO;
    case Errc::manifest_error: return TG_ERR_MANIFEST;
  }
  return TG_ERR_UNKNOWN;
}

template <typename Fn>
tg_status guarded(Fn&& fn) {
  try {
    fn();
    return TG_OK;
  } catch (const tg::Error& e) {
    g_last_error = e.what();
    return code_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TG_ERR_UNKNOWN;
  } catch (...) {
    g_last_error = "unknown failure";
    return TG_ERR_UNKNOWN;
  }
}

tg_status require(bool ok, const char* what) {
  if (ok) return TG_OK;
  g_last_error = what;
  return TG_ERR_INVALID_ARGUMENT;
}

const tg::Tensor& tensor_at(const tg_checkpoint* c, size_t index) {
  if (index >= c->value.tensor_count()) {
    tg::raise(tg::Errc::invalid_argument, "tensor index out of range");
  }
  return c->value.tensors()[index];
}

tg::LearnedChangeConfig to_cpp(const tg_learned_config& cfg) {
  tg::LearnedChangeConfig out;
  out.lambda = cfg.lambda;
  out.horizon = cfg.horizon;
  out.lr = cfg.lr;
  out.max_iters = cfg.max_iters;
  out.tol = cfg.tol;
  out.eps = cfg.eps;
  out.seed = cfg.seed;
  return out;
}

}  // namespace

extern "C" {

const char* tg_version(void) { return "1.0.0"; }

const char* tg_last_error(void) { return g_last_error.c_str(); }

tg_status tg_checkpoint_create(const char* const* names, const size_t* ranks,
                               const uint64_t* dims, const double* values,
                               size_t n_tensors, tg_dtype dtype,
                               int64_t timestamp, tg_checkpoint** out) {
  if (auto bad = require(out && (n_tensors == 0 || (names && ranks && dims && values)),
                         "null argument")) {
    return bad;
  }
  return guarded([&] {
    std::vector<tg::Tensor> tensors;
    tensors.reserve(n_tensors);
    size_t dim_pos = 0;
    size_t value_pos = 0;
    for (size_t i = 0; i < n_tensors; ++i) {
      tg::Tensor t;
      if (!names[i]) tg::raise(tg::Errc::invalid_argument, "null tensor name");
      t.name = names[i];
      t.shape.assign(dims + dim_pos, dims + dim_pos + ranks[i]);
      dim_pos += ranks[i];
      const size_t count = tg::shape_count(t.shape);
      t.values.assign(values + value_pos, values + value_pos + count);
      value_pos += count;
      tensors.push_back(std::move(t));
    }
    *out = new tg_checkpoint{tg::Checkpoint(
        std::move(tensors), timestamp,
        dtype == TG_DTYPE_F32 ? tg::Dtype::f32 : tg::Dtype::f64)};
  });
}

tg_status tg_checkpoint_load(const char* path, int64_t timestamp,
                             tg_checkpoint** out) {
  if (auto bad = require(path && out, "null argument")) return bad;
  return guarded([&] { *out = new tg_checkpoint{tg::load(path, timestamp)}; });
}

tg_status tg_checkpoint_save(const tg_checkpoint* c, const char* path) {
  if (auto bad = require(c && path, "null argument")) return bad;
  return guarded([&] { tg::save(c->value, path); });
}

void tg_checkpoint_free(tg_checkpoint* c) { delete c; }

tg_status tg_checkpoint_timestamp(const tg_checkpoint* c, int64_t* out) {
  if (auto bad = require(c && out, "null argument")) return bad;
  *out = c->value.timestamp();
  return TG_OK;
}

tg_status tg_checkpoint_dtype(const tg_checkpoint* c, tg_dtype* out) {
  if (auto bad = require(c && out, "null argument")) return bad;
  *out = c->value.dtype() == tg::Dtype::f32 ? TG_DTYPE_F32 : TG_DTYPE_F64;
  return TG_OK;
}

tg_status tg_checkpoint_tensor_count(const tg_checkpoint* c, size_t* out) {
  if (auto bad = require(c && out, "null argument")) return bad;
  *out = c->value.tensor_count();
  return TG_OK;
}

tg_status tg_checkpoint_tensor_name(const tg_checkpoint* c, size_t index,
                                    const char** out) {
  if (auto bad = require(c && out, "null argument")) return bad;
  return guarded([&] { *out = tensor_at(c, index).name.c_str(); });
}

tg_status tg_checkpoint_tensor_size(const tg_checkpoint* c, size_t index,
                                    size_t* out) {
  if (auto bad = require(c && out, "null argument")) return bad;
  return guarded([&] { *out = tensor_at(c, index).size(); });
}

tg_status tg_checkpoint_tensor_rank(const tg_checkpoint* c, size_t index,
                                    size_t* out) {
  if (auto bad = require(c && out, "null argument")) return bad;
  return guarded([&] { *out = tensor_at(c, index).shape.size(); });
}

tg_status tg_checkpoint_tensor_dims(const tg_checkpoint* c, size_t index,
                                    uint64_t* out, size_t capacity) {
  if (auto bad = require(c && out, "null argument")) return bad;
  return guarded([&] {
    const auto& shape = tensor_at(c, index).shape;
    if (capacity < shape.size()) {
      tg::raise(tg::Errc::invalid_argument, "buffer too small for dims");
    }
    std::copy(shape.begin(), shape.end(), out);
  });
}

tg_status tg_checkpoint_tensor_values(const tg_checkpoint* c, size_t index,
                                      double* out, size_t capacity) {
  if (auto bad = require(c && out, "null argument")) return bad;
  return guarded([&] {
    const auto& tensor = tensor_at(c, index);
    if (capacity < tensor.size()) {
      tg::raise(tg::Errc::invalid_argument, "buffer too small for tensor");
    }
    std::memcpy(out, tensor.values.data(), tensor.size() * sizeof(double));
  });
}

tg_status tg_checkpoint_l2_norm(const tg_checkpoint* c, double* out) {
  if (auto bad = require(c && out, "null argument")) return bad;
  return guarded([&] { *out = tg::l2_norm(c->value); });
}

tg_status tg_checkpoint_equal(const tg_checkpoint* a, const tg_checkpoint* b,
                              int* out) {
  if (auto bad = require(a && b && out, "null argument")) return bad;
  *out = a->value == b->value ? 1 : 0;
  return TG_OK;
}

tg_status tg_trajectory_load(const char* manifest_path, tg_trajectory** out) {
  if (auto bad = require(manifest_path && out, "null argument")) return bad;
  return guarded([&] { *out = new tg_trajectory{tg::load_trajectory(manifest_path)}; });
}

tg_status tg_trajectory_save(const tg_trajectory* traj, const char* dir) {
  if (auto bad = require(traj && dir, "null argument")) return bad;
  return guarded([&] { tg::save_trajectory(traj->value, dir); });
}

void tg_trajectory_free(tg_trajectory* traj) { delete traj; }

tg_status tg_trajectory_length(const tg_trajectory* traj, size_t* out) {
  if (auto bad = require(traj && out, "null argument")) return bad;
  *out = traj->value.size();
  return TG_OK;
}

tg_status tg_trajectory_step(const tg_trajectory* traj, int64_t* out) {
  if (auto bad = require(traj && out, "null argument")) return bad;
  *out = traj->value.step();
  return TG_OK;
}

tg_status tg_trajectory_checkpoint(const tg_trajectory* traj, size_t index,
                                   tg_checkpoint** out) {
  if (auto bad = require(traj && out, "null argument")) return bad;
  return guarded([&] {
    if (index >= traj->value.size()) {
      tg::raise(tg::Errc::invalid_argument, "checkpoint index out of range");
    }
    *out = new tg_checkpoint{traj->value[index]};
  });
}

tg_status tg_recent(const tg_trajectory* traj, tg_checkpoint** out) {
  if (auto bad = require(traj && out, "null argument")) return bad;
  return guarded([&] { *out = new tg_checkpoint{tg::recent(traj->value)}; });
}

tg_status tg_merge(const tg_trajectory* traj, const double* alphas, size_t n_alphas,
                   tg_checkpoint** out) {
  if (auto bad = require(traj && alphas && out, "null argument")) return bad;
  return guarded([&] {
    tg::MergeWeights weights;
    weights.alphas.assign(alphas, alphas + n_alphas);
    *out = new tg_checkpoint{tg::merge(traj->value, weights)};
  });
}

tg_status tg_merge_uniform(const tg_trajectory* traj, tg_checkpoint** out) {
  if (auto bad = require(traj && out, "null argument")) return bad;
  return guarded([&] {
    *out = new tg_checkpoint{
        tg::merge(traj->value, tg::uniform_weights(traj->value.size()))};
  });
}

tg_status tg_merge_ema(const tg_trajectory* traj, double decay, tg_checkpoint** out) {
  if (auto bad = require(traj && out, "null argument")) return bad;
  return guarded([&] {
    *out = new tg_checkpoint{
        tg::merge(traj->value, tg::ema_weights(traj->value.size(), decay))};
  });
}

tg_status tg_downscale(const tg_checkpoint* c, double alpha, tg_checkpoint** out) {
  if (auto bad = require(c && out, "null argument")) return bad;
  return guarded([&] { *out = new tg_checkpoint{tg::downscale(c->value, {alpha})}; });
}

tg_status tg_taylor_step(const tg_trajectory* traj, double alpha, int lookback,
                         tg_checkpoint** out) {
  if (auto bad = require(traj && out, "null argument")) return bad;
  return guarded([&] {
    *out = new tg_checkpoint{tg::taylor_step(traj->value, {alpha, lookback})};
  });
}

tg_status tg_taylor_order2(const tg_trajectory* traj, double alpha, int lookback,
                           tg_checkpoint** out) {
  if (auto bad = require(traj && out, "null argument")) return bad;
  return guarded([&] {
    *out = new tg_checkpoint{tg::taylor_order2(traj->value, {alpha, lookback})};
  });
}

void tg_learned_config_default(tg_learned_config* cfg) {
  if (!cfg) return;
  const tg::LearnedChangeConfig defaults;
  cfg->lambda = defaults.lambda;
  cfg->horizon = defaults.horizon;
  cfg->lr = defaults.lr;
  cfg->max_iters = defaults.max_iters;
  cfg->tol = defaults.tol;
  cfg->eps = defaults.eps;
  cfg->seed = defaults.seed;
}

tg_status tg_fit_learned_offset(const tg_trajectory* traj,
                                const tg_learned_config* cfg,
                                tg_checkpoint** offset, int* converged) {
  if (auto bad = require(traj && cfg && offset, "null argument")) return bad;
  return guarded([&] {
    auto fit = tg::fit_learned_offset(traj->value, to_cpp(*cfg));
    *offset = new tg_checkpoint{std::move(fit.offset)};
    if (converged) *converged = fit.converged ? 1 : 0;
  });
}

tg_status tg_fit_learned_coeff(const tg_trajectory* traj, const tg_learned_config* cfg,
                               tg_checkpoint** offset, double* alpha, double* beta,
                               int* converged) {
  if (auto bad = require(traj && cfg && offset && alpha && beta, "null argument")) {
    return bad;
  }
  return guarded([&] {
    auto fit = tg::fit_learned_coeff(traj->value, to_cpp(*cfg));
    *offset = new tg_checkpoint{std::move(fit.offset)};
    *alpha = fit.params.alpha;
    *beta = fit.params.beta;
    if (converged) *converged = fit.converged ? 1 : 0;
  });
}

tg_status tg_apply_learned(const tg_checkpoint* last, const tg_checkpoint* offset,
                           int use_coeff, double alpha, double beta, int64_t delta,
                           tg_checkpoint** out) {
  if (auto bad = require(last && offset && out, "null argument")) return bad;
  return guarded([&] {
    std::optional<tg::CoeffParams> params;
    if (use_coeff) params = tg::CoeffParams{alpha, beta};
    *out = new tg_checkpoint{
        tg::apply_learned(last->value, offset->value, params, delta)};
  });
}

tg_status tg_select_alpha(const tg_trajectory* history, tg_method_kind method,
                          int lookback, const tg_search_space* space, tg_eval_fn eval,
                          void* user, double* alpha_star, double* alphas,
                          double* scores, size_t capacity) {
  if (auto bad = require(history && space && eval && alpha_star, "null argument")) {
    return bad;
  }
  return guarded([&] {
    tg::MethodSpec spec;
    switch (method) {
      case TG_METHOD_DOWNSCALE: spec.kind = tg::MethodSpec::Kind::downscale; break;
      case TG_METHOD_TAYLOR: spec.kind = tg::MethodSpec::Kind::taylor; break;
      case TG_METHOD_EMA: spec.kind = tg::MethodSpec::Kind::ema; break;
      default: tg::raise(tg::Errc::invalid_argument, "unknown method kind");
    }
    spec.lookback = lookback;
    tg::SearchSpace cpp_space;
    cpp_space.kind = space->kind == TG_SPACE_GRID ? tg::SearchSpace::Kind::grid
                                                  : tg::SearchSpace::Kind::random;
    cpp_space.lo = space->lo;
    cpp_space.hi = space->hi;
    cpp_space.count = space->count;
    cpp_space.seed = space->seed;

    const auto selection = tg::select_alpha(
        history->value, spec, cpp_space, [&](const tg::Checkpoint& candidate) {
          const tg_checkpoint handle{candidate};
          return eval(&handle, user);
        });
    *alpha_star = selection.alpha_star;
    if (alphas && scores) {
      if (capacity < selection.scores.size()) {
        tg::raise(tg::Errc::invalid_argument, "score table buffer too small");
      }
      for (std::size_t i = 0; i < selection.scores.size(); ++i) {
        alphas[i] = selection.scores[i].alpha;
        scores[i] = selection.scores[i].score;
      }
    }
  });
}

tg_status tg_run_experiment(const char* manifest_path, int oracle_future,
                            int threads) {
  if (auto bad = require(manifest_path, "null argument")) return bad;
  return guarded([&] {
    const auto manifest = tg::ExperimentManifest::parse_file(manifest_path);
    tg::RunOptions options;
    options.oracle_future = oracle_future != 0;
    options.threads = threads;
    tg::run_experiment(manifest, options);
  });
}

void tg_synth_options_default(tg_synth_options* opts) {
  if (!opts) return;
  const tg::SyntheticTask task;
  *opts = tg_synth_options{};
  opts->dim = task.dim;
  opts->t_count = task.t_count;
  opts->noise_sigma = task.noise_sigma;
  opts->n_train = task.n_train;
  opts->n_val = task.n_val;
  opts->n_test = task.n_test;
  opts->seed = task.seed;
  const tg::MlpSpec mlp;
  opts->hidden = mlp.hidden;
  opts->init_scale = mlp.init_scale;
  const tg::TrainConfig train;
  opts->lr = train.lr;
  opts->iters = train.iters;
  opts->batch = train.batch;
}

tg_status tg_synth(const tg_synth_options* opts, const char* out_dir) {
  if (auto bad = require(opts && out_dir, "null argument")) return bad;
  return guarded([&] {
    tg::SynthOptions options;
    options.task = tg::SyntheticTask::with_default_coeffs(opts->dim, opts->seed);
    options.task.noise_sigma = opts->noise_sigma;
    options.task.n_train = opts->n_train;
    options.task.n_val = opts->n_val;
    options.task.n_test = opts->n_test;
    options.task.t_count = opts->t_count;
    options.task.seed = opts->seed;
    const auto dim = static_cast<std::size_t>(options.task.dim);
    if (opts->coeff_a) options.task.a.assign(opts->coeff_a, opts->coeff_a + dim);
    if (opts->coeff_b) options.task.b.assign(opts->coeff_b, opts->coeff_b + dim);
    if (opts->coeff_c) options.task.c.assign(opts->coeff_c, opts->coeff_c + dim);
    if (opts->coeff_d) options.task.d.assign(opts->coeff_d, opts->coeff_d + dim);
    options.learner.kind = opts->learner_mlp ? tg::LearnerKind::mlp
                                             : tg::LearnerKind::ols;
    options.learner.mlp.hidden = opts->hidden;
    options.learner.mlp.init_scale = opts->init_scale;
    options.learner.mlp.seed = opts->seed;
    options.train.loss = opts->loss_cross_entropy ? tg::Loss::cross_entropy
                                                  : tg::Loss::mse;
    options.train.lr = opts->lr;
    options.train.iters = opts->iters;
    options.train.batch = opts->batch;
    options.train.seed = opts->seed;
    options.train.init = opts->init_from_base ? tg::InitMode::from_base
                                              : tg::InitMode::from_previous;
    options.out_dir = out_dir;
    tg::run_synth(options);
  });
}

tg_status tg_figures(const char* results_dir) {
  if (auto bad = require(results_dir, "null argument")) return bad;
  return guarded([&] { tg::run_figures(results_dir); });
}

}  // extern "C"
