#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tg/checkpoint.hpp"

namespace tg {

/// Generative benchmark: true regression parameters evolve as a cubic in the
/// timestamp, theta*_t = a + b t + c t^2 + d t^3, inputs are standard normal,
/// and targets are x . theta*_t plus Gaussian noise.
struct SyntheticTask {
  int dim = 2;
  std::vector<double> a, b, c, d;  // per-dimension cubic coefficients
  double noise_sigma = 0.1;
  int n_train = 200;
  int n_val = 100;
  int n_test = 100;
  int t_count = 20;
  std::uint64_t seed = 0;

  void validate() const;

  /// Default coefficients: magnitudes (1, 0.5, 0.05, 0.005) per dimension,
  /// with the sign of the b/c/d entries of each dimension flipped by one coin
  /// from the task seed (the constant term stays +1).
  static SyntheticTask with_default_coeffs(int dim, std::uint64_t seed);
};

/// One timestamp's draw. Rows are ordered train, then validation, then test;
/// the slice accessors below cut along those boundaries.
struct TimestampData {
  std::vector<double> x;  // n * dim, row-major
  std::vector<double> y;  // n
  std::vector<double> theta_star;
  int dim = 0;
  int n = 0;
  int n_train = 0;
  int n_val = 0;
  int n_test = 0;

  TimestampData train() const;
  TimestampData val() const;
  TimestampData test() const;
};

std::vector<double> true_params(const SyntheticTask& task, std::int64_t t);

/// Draws the full sample set for timestamp t from the [data] stream of
/// derive_seed(task.seed, t): first all inputs row-major, then one noise
/// variate per row (drawn even when sigma is zero, so streams never shift).
TimestampData generate(const SyntheticTask& task, std::int64_t t);

/// Binary variant: labels are 1 when x . theta*_t > 0, then flipped with
/// probability 0.05. Stream order: inputs as above, then one uniform per row
/// for the flips.
TimestampData generate_logistic(const SyntheticTask& task, std::int64_t t);

/// Ordinary least squares via the normal equations, accumulated in f64.
std::vector<double> fit_ols(const TimestampData& data);

/// One-hidden-layer tanh regressor: y = w2 . tanh(W1 x + b1) + b2.
/// Checkpoint layout: tensors "w1" (h x d), "b1" (h), "w2" (h), "b2" (1).
struct MlpSpec {
  int hidden = 32;
  double init_scale = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class Loss { mse, cross_entropy };
enum class InitMode { from_previous, from_base };

struct TrainConfig {
  Loss loss = Loss::mse;
  double lr = 1e-2;
  int iters = 2000;
  int batch = 32;
  std::uint64_t seed = 0;
  InitMode init = InitMode::from_previous;

  void validate() const;
};

/// Fresh Gaussian initialization from the spec's [init] stream. Draw order:
/// w1 row-major, b1, w2, b2, each scaled by init_scale.
Checkpoint init_mlp(const MlpSpec& spec, int dim);

/// Seeded mini-batch gradient descent. Batches walk a per-epoch Fisher-Yates
/// shuffle driven by the config's [shuffle] stream. Throws DivergenceError if
/// the loss or any parameter stops being finite.
Checkpoint train_mlp(const TimestampData& data, const MlpSpec& spec,
                     const TrainConfig& cfg,
                     const std::optional<Checkpoint>& warm_start = std::nullopt);

double mlp_loss(const Checkpoint& c, const TimestampData& data, Loss loss);

enum class LearnerKind { ols, mlp };

struct Learner {
  LearnerKind kind = LearnerKind::ols;
  MlpSpec mlp{};
};

/// One checkpoint per timestamp t = 1..t_count. OLS refits exactly each step
/// (it has no warm-start dependence). The MLP starts from the base
/// initialization at t = 1 and then either continues from the previous
/// solution (from_previous) or restarts from the same base (from_base). The
/// per-step shuffle seed is derive_seed(cfg.seed, t).
Trajectory run_continual(const SyntheticTask& task, const Learner& learner,
                         const TrainConfig& cfg);

/// Relabels hidden units: row i of the result takes row perm[i] of the input
/// (consistently across w1, b1, w2). The function computed by the network is
/// unchanged; the parameter vector generally is not.
Checkpoint permute_hidden(const Checkpoint& c, const MlpSpec& spec,
                          std::span<const std::size_t> perm);

enum class ModelKind { linear, mlp };

/// Predictions for every row of data.x under the given parameters.
std::vector<double> predict(const Checkpoint& c, ModelKind kind,
                            const TimestampData& data);

/// Mean squared prediction error on the given data.
double evaluate_forecast(const Checkpoint& pred, const TimestampData& future,
                         ModelKind kind);

}  // namespace tg
