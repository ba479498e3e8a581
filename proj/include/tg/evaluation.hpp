#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "tg/checkpoint.hpp"

namespace tg {

enum class Direction { higher_better, lower_better };

/// Sparse matrix of performance values M[t, j] for models anchored at
/// training timestamp t and evaluated on future timestamp j, with
/// t < j <= t + delta. Rows near the end of a stream may be truncated; the
/// metrics below handle that by averaging over the entries that exist.
class FwtMatrix {
 public:
  FwtMatrix(Direction direction, int delta, std::int64_t t_min, std::int64_t t_max);

  void set(std::int64_t t, std::int64_t j, double value);

  const std::map<std::pair<std::int64_t, std::int64_t>, double>& entries() const {
    return entries_;
  }
  Direction direction() const { return direction_; }
  int delta() const { return delta_; }
  std::int64_t t_min() const { return t_min_; }
  std::int64_t t_max() const { return t_max_; }
  bool empty() const { return entries_.empty(); }

 private:
  std::map<std::pair<std::int64_t, std::int64_t>, double> entries_;
  Direction direction_;
  int delta_;
  std::int64_t t_min_;
  std::int64_t t_max_;
};

/// Mean over every present entry (the count of present entries is the
/// denominator, so truncated horizons are handled naturally).
double avg_fwt(const FwtMatrix& m);

/// Per-row worst entry (min when higher is better, max when lower is
/// better), averaged over rows. Every t in [t_min, t_max] must have at least
/// one entry.
double worst_fwt(const FwtMatrix& m);

/// (timestamp, l2 norm) per checkpoint, in time order.
std::vector<std::pair<std::int64_t, double>> norm_curve(const Trajectory& traj);

struct Projection {
  std::vector<std::array<double, 2>> points;   // per-checkpoint 2-D scores
  std::array<double, 2> explained_variance{};  // fractions, non-increasing
  std::vector<double> mean;                    // centering vector
};

/// Two-dimensional principal-component scores of the flattened checkpoints.
/// Computed from the (time x time) Gram matrix of the centered rows, so the
/// cost is independent of the parameter count. Scores are deterministic: the
/// sign of each axis is fixed so its first nonzero coordinate is positive.
Projection pca_project(const Trajectory& traj);

/// Kendall rank correlation (tau-a) between two equally long sequences.
double kendall_tau(std::span<const double> xs, std::span<const double> ys);

// Canonical CSV renderings (17 significant digits, LF newlines).
void write_fwt_csv(const FwtMatrix& m, std::ostream& out);                // t,j,value
void write_norm_csv(std::span<const std::pair<std::int64_t, double>> curve,
                    std::ostream& out);                                   // t,l2_norm
void write_projection_csv(const Trajectory& traj, const Projection& p,
                          std::ostream& out);                             // t,pc1,pc2

/// printf "%.17g" rendering used for every floating-point value we persist.
std::string format_double(double v);

}  // namespace tg
