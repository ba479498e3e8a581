#include "tg/interp.hpp"

#include <cmath>

namespace tg {

namespace {
constexpr double kSumTolerance = 1e-9;
}

void MergeWeights::validate() const {
  if (alphas.empty()) raise(Errc::weight_error, "no weights given");
  double sum = 0.0;
  for (double a : alphas) {
    if (!(a >= 0.0)) raise(Errc::weight_error, "weights must be non-negative");
    sum += a;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    raise(Errc::weight_error,
          "weights must sum to 1 within 1e-9 (got " + std::to_string(sum) + ")");
  }
}

MergeWeights uniform_weights(std::size_t n) {
  if (n < 1) raise(Errc::weight_error, "need at least one checkpoint weight");
  MergeWeights w;
  w.alphas.assign(n + 1, 1.0 / static_cast<double>(n));
  w.alphas[0] = 0.0;
  return w;
}

MergeWeights ema_weights(std::size_t n, double decay) {
  if (n < 1) raise(Errc::weight_error, "need at least one checkpoint weight");
  if (!(decay > 0.0 && decay < 1.0)) {
    raise(Errc::weight_error, "decay must lie in (0, 1)");
  }
  MergeWeights w;
  w.alphas.assign(n + 1, 0.0);
  double sum = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    w.alphas[i] = std::pow(decay, static_cast<double>(n - i));
    sum += w.alphas[i];
  }
  for (std::size_t i = 1; i <= n; ++i) w.alphas[i] /= sum;
  return w;
}

void DownscaleConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    raise(Errc::invalid_argument, "downscale alpha must lie in [0, 1]");
  }
}

Checkpoint merge(const Trajectory& traj, const MergeWeights& weights) {
  weights.validate();
  if (weights.alphas.size() != traj.size() + 1) {
    raise(Errc::weight_error,
          "need one weight per checkpoint plus the zero slot: expected " +
              std::to_string(traj.size() + 1) + ", got " +
              std::to_string(weights.alphas.size()));
  }
  // Slot 0 is the zero vector; it never contributes to the sum.
  std::vector<const Checkpoint*> cks;
  cks.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) cks.push_back(&traj[i]);
  return linear_combination(
      cks, std::span<const double>(weights.alphas).subspan(1),
      traj.back().timestamp());
}

Checkpoint downscale(const Checkpoint& c, const DownscaleConfig& cfg) {
  cfg.validate();
  const Checkpoint* self[] = {&c};
  const double coeff[] = {cfg.alpha};
  return linear_combination(self, coeff, c.timestamp());
}

Checkpoint recent(const Trajectory& traj) {
  if (traj.size() == 0) raise(Errc::empty_trajectory, "no checkpoints");
  return traj.back();
}

}  // namespace tg
