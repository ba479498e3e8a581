#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "tg/checkpoint.hpp"
#include "tg/extrap.hpp"
#include "tg/interp.hpp"

namespace tg {

/// Tagged configuration selecting one estimation method plus its
/// hyperparameters.
struct MethodSpec {
  enum class Kind {
    recent,          // last checkpoint as-is
    average,         // uniform merge of all checkpoints
    ema,             // exponentially decaying merge
    downscale,       // alpha * last checkpoint
    taylor,          // first-order finite-difference step
    learned_offset,  // fitted global change, no scaling
    learned_coeff,   // fitted change with softplus(alpha d + beta) scaling
  };

  Kind kind = Kind::recent;
  std::string label;  // output label; empty means the kind name
  double alpha = 1.0;          // downscale / taylor step size
  double decay = 0.9;          // ema
  int lookback = 1;            // taylor
  LearnedChangeConfig learned{};

  std::string_view name() const;
};

std::string_view method_kind_name(MethodSpec::Kind kind);
MethodSpec::Kind method_kind_from_name(std::string_view name);

/// Checkpoints the method needs before it can produce an estimate.
std::size_t min_history(const MethodSpec& spec);

/// True for methods whose single scalar can be tuned on validation data.
bool tunable(MethodSpec::Kind kind);

/// The scalar that turns the method into a no-op relative to the most recent
/// checkpoint (used to break validation-score ties).
double neutral_alpha(MethodSpec::Kind kind);

/// The method's estimate with its scalar replaced by `alpha`.
Checkpoint make_candidate(const Trajectory& history, const MethodSpec& spec,
                          double alpha);

/// Per-anchor forecaster. Construction does any fitting once; `at(k)`
/// returns the estimate for k intervals past the last checkpoint. Methods
/// without a horizon dependence return the same checkpoint for every k.
class Forecaster {
 public:
  Forecaster(const Trajectory& history, const MethodSpec& spec);

  Checkpoint at(std::int64_t k) const;

 private:
  Checkpoint estimate_;                // k-independent methods
  std::optional<Checkpoint> last_;     // learned methods
  std::optional<Checkpoint> offset_;
  std::optional<CoeffParams> params_;  // learned_coeff only
};

}  // namespace tg
