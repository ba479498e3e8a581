#pragma once

#include <vector>

#include "tg/checkpoint.hpp"

namespace tg {

/// Convex-combination weights over {zero vector, checkpoint 1, ...,
/// checkpoint n}. Slot 0 always addresses the implicit zero vector, so
/// downscaling is the {slot 0, slot n} special case of merging.
struct MergeWeights {
  std::vector<double> alphas;

  /// WeightError unless all weights are >= 0 and they sum to 1 within 1e-9
  /// absolute. Out-of-tolerance inputs are rejected, never renormalized.
  void validate() const;
};

/// alpha_0 = 0, alpha_1..n = 1/n.
MergeWeights uniform_weights(std::size_t n);

/// alpha_0 = 0, alpha_i proportional to decay^(n-i), normalized to sum 1.
/// The most recent checkpoint always carries the largest weight.
MergeWeights ema_weights(std::size_t n, double decay);

struct DownscaleConfig {
  double alpha = 1.0;  // in [0, 1]

  void validate() const;
};

/// Weighted average of the trajectory's checkpoints (plus the zero vector in
/// slot 0). Requires weights.alphas.size() == traj.size() + 1. Accumulates in
/// f64 and casts to the trajectory's dtype; the output carries the last
/// checkpoint's timestamp.
Checkpoint merge(const Trajectory& traj, const MergeWeights& weights);

/// Every element multiplied by cfg.alpha; shrinks the norm, keeps the
/// direction.
Checkpoint downscale(const Checkpoint& c, const DownscaleConfig& cfg);

/// The most recent checkpoint, unchanged.
Checkpoint recent(const Trajectory& traj);

}  // namespace tg
