#include "tg/methods.hpp"

namespace tg {

std::string_view method_kind_name(MethodSpec::Kind kind) {
  switch (kind) {
    case MethodSpec::Kind::recent: return "recent";
    case MethodSpec::Kind::average: return "average";
    case MethodSpec::Kind::ema: return "ema";
    case MethodSpec::Kind::downscale: return "downscale";
    case MethodSpec::Kind::taylor: return "taylor";
    case MethodSpec::Kind::learned_offset: return "learned_offset";
    case MethodSpec::Kind::learned_coeff: return "learned_coeff";
  }
  return "unknown";
}

MethodSpec::Kind method_kind_from_name(std::string_view name) {
  for (auto kind : {MethodSpec::Kind::recent, MethodSpec::Kind::average,
                    MethodSpec::Kind::ema, MethodSpec::Kind::downscale,
                    MethodSpec::Kind::taylor, MethodSpec::Kind::learned_offset,
                    MethodSpec::Kind::learned_coeff}) {
    if (method_kind_name(kind) == name) return kind;
  }
  raise(Errc::invalid_argument, "unknown method '" + std::string(name) + "'");
}

std::string_view MethodSpec::name() const {
  return label.empty() ? method_kind_name(kind) : std::string_view(label);
}

std::size_t min_history(const MethodSpec& spec) {
  switch (spec.kind) {
    case MethodSpec::Kind::taylor:
      return static_cast<std::size_t>(spec.lookback) + 1;
    case MethodSpec::Kind::learned_offset:
    case MethodSpec::Kind::learned_coeff:
      return 2;
    default:
      return 1;
  }
}

bool tunable(MethodSpec::Kind kind) {
  return kind == MethodSpec::Kind::downscale || kind == MethodSpec::Kind::taylor ||
         kind == MethodSpec::Kind::ema;
}

double neutral_alpha(MethodSpec::Kind kind) {
  switch (kind) {
    case MethodSpec::Kind::downscale: return 1.0;
    case MethodSpec::Kind::taylor: return 0.0;
    case MethodSpec::Kind::ema: return 1.0;
    default:
      raise(Errc::invalid_argument, "method '" +
                                        std::string(method_kind_name(kind)) +
                                        "' has no tunable scalar");
  }
}

Checkpoint make_candidate(const Trajectory& history, const MethodSpec& spec,
                          double alpha) {
  switch (spec.kind) {
    case MethodSpec::Kind::downscale:
      return downscale(recent(history), {alpha});
    case MethodSpec::Kind::taylor:
      return taylor_step(history, {alpha, spec.lookback});
    case MethodSpec::Kind::ema:
      return merge(history, ema_weights(history.size(), alpha));
    default:
      raise(Errc::invalid_argument, "method '" + std::string(spec.name()) +
                                        "' has no tunable scalar");
  }
}

Forecaster::Forecaster(const Trajectory& history, const MethodSpec& spec) {
  if (history.size() < min_history(spec)) {
    raise(Errc::insufficient_history,
          "method '" + std::string(spec.name()) + "' needs " +
              std::to_string(min_history(spec)) + " checkpoints, have " +
              std::to_string(history.size()));
  }
  switch (spec.kind) {
    case MethodSpec::Kind::recent:
      estimate_ = recent(history);
      break;
    case MethodSpec::Kind::average:
      estimate_ = merge(history, uniform_weights(history.size()));
      break;
    case MethodSpec::Kind::ema:
      estimate_ = merge(history, ema_weights(history.size(), spec.decay));
      break;
    case MethodSpec::Kind::downscale:
      estimate_ = downscale(recent(history), {spec.alpha});
      break;
    case MethodSpec::Kind::taylor:
      estimate_ = taylor_step(history, {spec.alpha, spec.lookback});
      break;
    case MethodSpec::Kind::learned_offset: {
      auto fit = fit_learned_offset(history, spec.learned);
      last_ = history.back();
      offset_ = std::move(fit.offset);
      break;
    }
    case MethodSpec::Kind::learned_coeff: {
      auto fit = fit_learned_coeff(history, spec.learned);
      last_ = history.back();
      offset_ = std::move(fit.offset);
      params_ = fit.params;
      break;
    }
  }
}

Checkpoint Forecaster::at(std::int64_t k) const {
  if (k < 1) raise(Errc::invalid_argument, "forecast distance must be >= 1");
  if (!offset_) return estimate_;
  if (params_) return apply_learned(*last_, *offset_, params_, k);
  // Offset forecasts advance one interval per application; composing k of
  // them lands at last + k * offset.
  const Checkpoint* cks[] = {&*last_, &*offset_};
  const double coeffs[] = {1.0, static_cast<double>(k)};
  return linear_combination(cks, coeffs, last_->timestamp());
}

}  // namespace tg
