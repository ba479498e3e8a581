#include "tg/extrap.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace tg {
namespace {

double smooth_norm(std::span<const double> v, double eps) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum + eps * eps);
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct DescentResult {
  std::vector<double> x;
  double objective = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Deterministic descent from x0 with a fixed base step size. A step that
// fails to decrease the objective is retried with a halved step size; once a
// step is accepted the size is kept. Accepted objectives are therefore
// non-increasing, and the result never scores worse than x0.
DescentResult minimize(std::vector<double> x0,
                       const std::function<double(std::span<const double>)>& value,
                       const std::function<std::vector<double>(std::span<const double>)>& grad,
                       double lr, int max_iters, double tol) {
  DescentResult res;
  res.x = std::move(x0);
  res.objective = value(res.x);

  std::vector<double> candidate(res.x.size());
  double step = lr;
  for (int iter = 0; iter < max_iters; ++iter) {
    const std::vector<double> g = grad(res.x);
    double improvement = -1.0;
    for (int halving = 0; halving < 60; ++halving) {
      for (std::size_t i = 0; i < res.x.size(); ++i) {
        candidate[i] = res.x[i] - step * g[i];
      }
      const double cand_value = value(candidate);
      if (cand_value <= res.objective) {
        improvement = res.objective - cand_value;
        res.x.swap(candidate);
        res.objective = cand_value;
        break;
      }
      step *= 0.5;
    }
    res.iterations = iter + 1;
    if (improvement < 0.0) {
      // No step size yields descent: stationary to floating-point precision.
      res.converged = true;
      break;
    }
    if (improvement < tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

Checkpoint offset_to_checkpoint(std::span<const double> offset,
                                const Trajectory& traj) {
  return from_flat(offset, traj.back());
}

}  // namespace

void TaylorConfig::validate() const {
  if (lookback < 1) raise(Errc::invalid_argument, "lookback must be >= 1");
  if (!std::isfinite(alpha)) raise(Errc::invalid_argument, "alpha must be finite");
}

Checkpoint taylor_step(const Trajectory& traj, const TaylorConfig& cfg) {
  cfg.validate();
  const std::size_t lb = static_cast<std::size_t>(cfg.lookback);
  if (traj.size() < lb + 1) {
    raise(Errc::insufficient_history,
          "first-order step needs " + std::to_string(lb + 1) + " checkpoints, have " +
              std::to_string(traj.size()));
  }
  const Checkpoint& last = traj[traj.size() - 1];
  const Checkpoint& older = traj[traj.size() - 1 - lb];
  const double dt = static_cast<double>(cfg.lookback) * static_cast<double>(traj.step());
  const double scale = cfg.alpha / dt;
  const Checkpoint* cks[] = {&last, &older};
  const double coeffs[] = {1.0 + scale, -scale};
  return linear_combination(cks, coeffs, last.timestamp());
}

Checkpoint taylor_order2(const Trajectory& traj, const TaylorConfig& cfg) {
  cfg.validate();
  const std::size_t lb = static_cast<std::size_t>(cfg.lookback);
  if (traj.size() < 2 * lb + 1) {
    raise(Errc::insufficient_history,
          "second-order step needs " + std::to_string(2 * lb + 1) +
              " checkpoints, have " + std::to_string(traj.size()));
  }
  const Checkpoint& last = traj[traj.size() - 1];
  const Checkpoint& older = traj[traj.size() - 1 - lb];
  const Checkpoint& oldest = traj[traj.size() - 1 - 2 * lb];
  const double dt = static_cast<double>(cfg.lookback) * static_cast<double>(traj.step());
  const double a1 = cfg.alpha / dt;
  const double a2 = cfg.alpha * cfg.alpha / (2.0 * dt * dt);
  const Checkpoint* cks[] = {&last, &older, &oldest};
  const double coeffs[] = {1.0 + a1 + a2, -a1 - 2.0 * a2, a2};
  return linear_combination(cks, coeffs, last.timestamp());
}

void LearnedChangeConfig::validate() const {
  if (!(lambda >= 0.0)) raise(Errc::invalid_argument, "lambda must be >= 0");
  if (horizon < 0) raise(Errc::invalid_argument, "horizon must be >= 0");
  if (!(lr > 0.0)) raise(Errc::invalid_argument, "lr must be > 0");
  if (max_iters < 1) raise(Errc::invalid_argument, "max_iters must be >= 1");
  if (!(tol > 0.0)) raise(Errc::invalid_argument, "tol must be > 0");
  if (!(eps > 0.0)) raise(Errc::invalid_argument, "eps must be > 0");
}

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

std::vector<std::vector<double>> increments(const Trajectory& traj) {
  if (traj.size() < 2) {
    raise(Errc::insufficient_history, "increments need at least two checkpoints");
  }
  std::vector<std::vector<double>> incs;
  incs.reserve(traj.size() - 1);
  FlatView prev = flatten(traj[0]);
  for (std::size_t i = 1; i < traj.size(); ++i) {
    FlatView cur = flatten(traj[i]);
    std::vector<double> d(cur.values.size());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = cur.values[k] - prev.values[k];
    incs.push_back(std::move(d));
    prev = std::move(cur);
  }
  return incs;
}

OffsetObjective::OffsetObjective(std::vector<std::vector<double>> increments,
                                 int horizon, double lambda, double eps)
    : increments_(std::move(increments)),
      dim_(increments_.empty() ? 0 : increments_.front().size()),
      repeat_(static_cast<double>(horizon) + 1.0),
      lambda_(lambda),
      eps_(eps) {}

double OffsetObjective::value(std::span<const double> offset) const {
  std::vector<double> residual(dim_);
  double total = 0.0;
  for (const auto& inc : increments_) {
    for (std::size_t k = 0; k < dim_; ++k) residual[k] = inc[k] - offset[k];
    total += repeat_ * smooth_norm(residual, eps_);
  }
  return total + lambda_ * smooth_norm(offset, eps_);
}

std::vector<double> OffsetObjective::gradient(std::span<const double> offset) const {
  std::vector<double> g(dim_, 0.0);
  std::vector<double> residual(dim_);
  for (const auto& inc : increments_) {
    for (std::size_t k = 0; k < dim_; ++k) residual[k] = inc[k] - offset[k];
    const double norm = smooth_norm(residual, eps_);
    for (std::size_t k = 0; k < dim_; ++k) g[k] -= repeat_ * residual[k] / norm;
  }
  const double reg_norm = smooth_norm(offset, eps_);
  for (std::size_t k = 0; k < dim_; ++k) g[k] += lambda_ * offset[k] / reg_norm;
  return g;
}

CoeffObjective::CoeffObjective(std::vector<std::vector<double>> increments,
                               int horizon, double lambda, double eps)
    : increments_(std::move(increments)),
      dim_(increments_.empty() ? 0 : increments_.front().size()),
      horizon_(horizon),
      lambda_(lambda),
      eps_(eps) {}

double CoeffObjective::value(std::span<const double> packed) const {
  const auto offset = packed.first(dim_);
  const double alpha = packed[dim_];
  const double beta = packed[dim_ + 1];
  std::vector<double> residual(dim_);
  double total = 0.0;
  for (int d = 0; d <= horizon_; ++d) {
    const double scale = softplus(alpha * static_cast<double>(d) + beta);
    for (const auto& inc : increments_) {
      for (std::size_t k = 0; k < dim_; ++k) residual[k] = inc[k] - scale * offset[k];
      total += smooth_norm(residual, eps_);
    }
  }
  return total + lambda_ * smooth_norm(offset, eps_);
}

std::vector<double> CoeffObjective::gradient(std::span<const double> packed) const {
  const auto offset = packed.first(dim_);
  const double alpha = packed[dim_];
  const double beta = packed[dim_ + 1];
  std::vector<double> g(packed_size(), 0.0);
  std::vector<double> residual(dim_);
  for (int d = 0; d <= horizon_; ++d) {
    const double pre = alpha * static_cast<double>(d) + beta;
    const double scale = softplus(pre);
    const double dscale = sigmoid(pre);
    for (const auto& inc : increments_) {
      double dot = 0.0;
      for (std::size_t k = 0; k < dim_; ++k) {
        residual[k] = inc[k] - scale * offset[k];
        dot += residual[k] * offset[k];
      }
      const double norm = smooth_norm(residual, eps_);
      for (std::size_t k = 0; k < dim_; ++k) {
        g[k] -= scale * residual[k] / norm;
      }
      g[dim_] -= dscale * static_cast<double>(d) * dot / norm;
      g[dim_ + 1] -= dscale * dot / norm;
    }
  }
  const double reg_norm = smooth_norm(offset, eps_);
  for (std::size_t k = 0; k < dim_; ++k) g[k] += lambda_ * offset[k] / reg_norm;
  return g;
}

OffsetFit fit_learned_offset(const Trajectory& traj, const LearnedChangeConfig& cfg) {
  cfg.validate();
  const OffsetObjective objective(increments(traj), cfg.horizon, cfg.lambda, cfg.eps);
  auto result = minimize(
      std::vector<double>(objective.dim(), 0.0),
      [&](std::span<const double> x) { return objective.value(x); },
      [&](std::span<const double> x) { return objective.gradient(x); },
      cfg.lr, cfg.max_iters, cfg.tol);
  OffsetFit fit;
  fit.offset = offset_to_checkpoint(result.x, traj);
  fit.converged = result.converged;
  fit.objective = result.objective;
  fit.iterations = result.iterations;
  return fit;
}

CoeffFit fit_learned_coeff(const Trajectory& traj, const LearnedChangeConfig& cfg) {
  cfg.validate();
  const CoeffObjective objective(increments(traj), cfg.horizon, cfg.lambda, cfg.eps);
  auto result = minimize(
      std::vector<double>(objective.packed_size(), 0.0),
      [&](std::span<const double> x) { return objective.value(x); },
      [&](std::span<const double> x) { return objective.gradient(x); },
      cfg.lr, cfg.max_iters, cfg.tol);
  CoeffFit fit;
  fit.offset = offset_to_checkpoint(
      std::span<const double>(result.x).first(objective.dim()), traj);
  fit.params.alpha = result.x[objective.dim()];
  fit.params.beta = result.x[objective.dim() + 1];
  fit.converged = result.converged;
  fit.objective = result.objective;
  fit.iterations = result.iterations;
  return fit;
}

Checkpoint apply_learned(const Checkpoint& last, const Checkpoint& offset,
                         const std::optional<CoeffParams>& params,
                         std::int64_t delta) {
  require_congruent(last, offset);
  if (delta < 1) raise(Errc::invalid_argument, "delta must be >= 1");
  const double scale =
      params ? softplus(params->alpha * static_cast<double>(delta) + params->beta)
             : 1.0;
  const Checkpoint* cks[] = {&last, &offset};
  const double coeffs[] = {1.0, scale};
  return linear_combination(cks, coeffs, last.timestamp());
}

}  // namespace tg
