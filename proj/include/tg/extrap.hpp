#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tg/checkpoint.hpp"

namespace tg {

struct TaylorConfig {
  double alpha = 1.0;  // extrapolation step size; any sign
  int lookback = 1;    // finite-difference span in checkpoints (>= 1)

  void validate() const;
};

/// First-order step along the most recent finite difference:
///   last + alpha * (last - older) / dt,  dt = lookback * traj.step().
/// alpha = 0 returns the last checkpoint bit-exactly.
Checkpoint taylor_step(const Trajectory& traj, const TaylorConfig& cfg);

/// Second-order step from backward differences:
///   last + alpha * d1 + alpha^2/2 * d2
/// with d1 = (last - older) / dt and d2 = (last - 2*older + oldest) / dt^2.
Checkpoint taylor_order2(const Trajectory& traj, const TaylorConfig& cfg);

struct LearnedChangeConfig {
  double lambda = 0.0;    // regularization strength (>= 0)
  int horizon = 1;        // future offsets in the objective (>= 0)
  double lr = 1e-2;       // descent step size (> 0)
  int max_iters = 5000;   // (>= 1)
  double tol = 1e-10;     // stop when an accepted step improves less than this
  double eps = 1e-8;      // norm smoothing constant (> 0)
  std::uint64_t seed = 0; // recorded for provenance; fits start from zero

  void validate() const;
};

struct CoeffParams {
  double alpha = 0.0;
  double beta = 0.0;
};

struct OffsetFit {
  Checkpoint offset;  // checkpoint-shaped global change
  bool converged = false;
  double objective = 0.0;
  int iterations = 0;
};

struct CoeffFit {
  Checkpoint offset;
  CoeffParams params;
  bool converged = false;
  double objective = 0.0;
  int iterations = 0;
};

/// Fits a single global offset that explains consecutive checkpoint changes:
/// minimizes sum_t sum_{d=0..horizon} ||inc_t - offset|| + lambda * ||offset||
/// over the smoothed norm ||v|| ~ sqrt(|v|^2 + eps^2), by deterministic
/// descent from zero. Non-convergence is reported, not thrown; the best
/// iterate is always returned and never scores worse than the zero offset.
OffsetFit fit_learned_offset(const Trajectory& traj, const LearnedChangeConfig& cfg);

/// Joint fit of (offset, alpha, beta) where the offset is scaled by
/// softplus(alpha * d + beta) at future distance d:
/// minimizes sum_t sum_{d=0..horizon} ||inc_t - softplus(alpha d + beta) * offset||
///           + lambda * ||offset||.
CoeffFit fit_learned_coeff(const Trajectory& traj, const LearnedChangeConfig& cfg);

/// Forecast rule for the fitted change. Without params the offset advances
/// one inter-checkpoint interval per application (compose applications for
/// longer horizons; delta is ignored). With params the result is
/// last + softplus(alpha * delta + beta) * offset.
Checkpoint apply_learned(const Checkpoint& last, const Checkpoint& offset,
                         const std::optional<CoeffParams>& params,
                         std::int64_t delta = 1);

double softplus(double x);

// Smoothed objectives over a set of flat increment vectors, exposed so the
// analytic gradients can be verified independently.

class OffsetObjective {
 public:
  OffsetObjective(std::vector<std::vector<double>> increments, int horizon,
                  double lambda, double eps);

  std::size_t dim() const { return dim_; }
  double value(std::span<const double> offset) const;
  std::vector<double> gradient(std::span<const double> offset) const;

 private:
  std::vector<std::vector<double>> increments_;
  std::size_t dim_;
  double repeat_;  // horizon + 1 copies of every increment term
  double lambda_;
  double eps_;
};

class CoeffObjective {
 public:
  CoeffObjective(std::vector<std::vector<double>> increments, int horizon,
                 double lambda, double eps);

  /// Packed variable layout: [offset[0..dim), alpha, beta].
  std::size_t packed_size() const { return dim_ + 2; }
  std::size_t dim() const { return dim_; }
  double value(std::span<const double> packed) const;
  std::vector<double> gradient(std::span<const double> packed) const;

 private:
  std::vector<std::vector<double>> increments_;
  std::size_t dim_;
  int horizon_;
  double lambda_;
  double eps_;
};

/// Consecutive flattened differences of a trajectory (needs length >= 2).
std::vector<std::vector<double>> increments(const Trajectory& traj);

}  // namespace tg
