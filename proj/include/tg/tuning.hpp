#pragma once

#include <functional>
#include <vector>

#include "tg/checkpoint.hpp"
#include "tg/methods.hpp"

namespace tg {

/// Candidate set for the method's scalar hyperparameter.
struct SearchSpace {
  enum class Kind { grid, random };

  Kind kind = Kind::grid;
  double lo = 0.0;
  double hi = 1.0;
  int count = 1;
  std::uint64_t seed = 0;  // random kind only

  void validate() const;

  /// Deterministic candidate list. Grid: evenly spaced, endpoints exact.
  /// Random: `count` uniform draws from [lo, hi], sorted ascending.
  std::vector<double> candidates() const;
};

struct ValScore {
  double alpha = 0.0;
  double score = 0.0;
  bool failed = false;  // non-finite score or candidate construction blew up
};

struct Selection {
  double alpha_star = 0.0;
  std::vector<ValScore> scores;
};

/// Scores a candidate estimate; lower is better. Must look only at the
/// current timestamp's validation split.
using Evaluator = std::function<double(const Checkpoint&)>;

/// Leak-free scalar selection: every candidate estimate is built from the
/// given history alone and scored by the evaluator. The signature admits no
/// path to future data. Failed candidates are skipped; ties break toward the
/// method's neutral scalar and then toward the smaller candidate.
Selection select_alpha(const Trajectory& history, const MethodSpec& method,
                       const SearchSpace& space, const Evaluator& evaluator);

/// Stock search spaces: a [0.9, 1.0] grid in steps of 0.002 for downscaling,
/// and 30 random draws from [-1, 1] for the finite-difference step.
SearchSpace default_downscale_space();
SearchSpace default_taylor_space(std::uint64_t seed);

}  // namespace tg
