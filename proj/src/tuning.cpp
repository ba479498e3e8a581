#include "tg/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tg/rng.hpp"

namespace tg {

void SearchSpace::validate() const {
  if (!(lo <= hi)) raise(Errc::invalid_argument, "need lo <= hi");
  if (count < 1) raise(Errc::invalid_argument, "need at least one candidate");
}

std::vector<double> SearchSpace::candidates() const {
  validate();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  if (kind == Kind::grid) {
    if (count == 1) {
      out.push_back(lo);
      return out;
    }
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (int i = 0; i < count; ++i) {
      out.push_back(i == count - 1 ? hi : lo + step * static_cast<double>(i));
    }
    return out;
  }
  SplitMix64 g(seed);
  for (int i = 0; i < count; ++i) {
    out.push_back(lo + (hi - lo) * g.uniform());
  }
  std::sort(out.begin(), out.end());
  return out;
}

SearchSpace default_downscale_space() {
  return SearchSpace{SearchSpace::Kind::grid, 0.9, 1.0, 51, 0};
}

SearchSpace default_taylor_space(std::uint64_t seed) {
  return SearchSpace{SearchSpace::Kind::random, -1.0, 1.0, 30, seed};
}

Selection select_alpha(const Trajectory& history, const MethodSpec& method,
                       const SearchSpace& space, const Evaluator& evaluator) {
  if (history.size() == 0) raise(Errc::empty_history, "no checkpoints");
  if (!tunable(method.kind)) {
    raise(Errc::invalid_argument,
          "method '" + std::string(method.name()) + "' has no tunable scalar");
  }
  if (history.size() < min_history(method)) {
    raise(Errc::insufficient_history,
          "method '" + std::string(method.name()) + "' needs " +
              std::to_string(min_history(method)) + " checkpoints, have " +
              std::to_string(history.size()));
  }

  Selection sel;
  for (double alpha : space.candidates()) {
    ValScore entry{alpha, std::numeric_limits<double>::quiet_NaN(), true};
    try {
      const Checkpoint candidate = make_candidate(history, method, alpha);
      const double score = evaluator(candidate);
      if (std::isfinite(score)) {
        entry.score = score;
        entry.failed = false;
      }
    } catch (const Error& e) {
      // A candidate that overflows its dtype or falls outside the method's
      // scalar domain (a search space can straddle it) is a failed
      // candidate, not a failed selection.
      if (e.code() != Errc::non_finite && e.code() != Errc::weight_error &&
          e.code() != Errc::invalid_argument) {
        throw;
      }
    }
    sel.scores.push_back(entry);
  }

  const double neutral = neutral_alpha(method.kind);
  const ValScore* best = nullptr;
  for (const auto& entry : sel.scores) {
    if (entry.failed) continue;
    if (!best) {
      best = &entry;
      continue;
    }
    if (entry.score < best->score) {
      best = &entry;
    } else if (entry.score == best->score) {
      const double d_new = std::abs(entry.alpha - neutral);
      const double d_best = std::abs(best->alpha - neutral);
      if (d_new < d_best || (d_new == d_best && entry.alpha < best->alpha)) {
        best = &entry;
      }
    }
  }
  if (!best) raise(Errc::all_candidates_failed, "every candidate scored non-finite");
  sel.alpha_star = best->alpha;
  return sel;
}

}  // namespace tg
