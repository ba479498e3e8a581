#include "tg/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "tg/rng.hpp"

namespace tg {
namespace {

struct MlpParams {
  // Borrowed views into a checkpoint's tensors.
  const Tensor* w1;
  const Tensor* b1;
  const Tensor* w2;
  const Tensor* b2;
  int hidden;
  int dim;
};

MlpParams mlp_view(const Checkpoint& c) {
  MlpParams p{c.find("w1"), c.find("b1"), c.find("w2"), c.find("b2"), 0, 0};
  if (!p.w1 || !p.b1 || !p.w2 || !p.b2 || p.w1->shape.size() != 2 ||
      p.b1->shape.size() != 1 || p.w2->shape.size() != 1 || p.b2->shape.size() != 1) {
    raise(Errc::congruence_error, "checkpoint does not hold w1/b1/w2/b2 tensors");
  }
  p.hidden = static_cast<int>(p.w1->shape[0]);
  p.dim = static_cast<int>(p.w1->shape[1]);
  if (static_cast<int>(p.b1->shape[0]) != p.hidden ||
      static_cast<int>(p.w2->shape[0]) != p.hidden || p.b2->shape[0] != 1) {
    raise(Errc::congruence_error, "hidden-layer tensor shapes disagree");
  }
  return p;
}

double forward_one(const MlpParams& p, const double* row, std::vector<double>& act) {
  for (int h = 0; h < p.hidden; ++h) {
    double z = p.b1->values[static_cast<std::size_t>(h)];
    const double* wrow = p.w1->values.data() + static_cast<std::size_t>(h) * p.dim;
    for (int j = 0; j < p.dim; ++j) z += wrow[j] * row[j];
    act[static_cast<std::size_t>(h)] = std::tanh(z);
  }
  double out = p.b2->values[0];
  for (int h = 0; h < p.hidden; ++h) {
    out += p.w2->values[static_cast<std::size_t>(h)] * act[static_cast<std::size_t>(h)];
  }
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Numerically stable binary cross-entropy with logits, y in {0, 1}.
double logistic_loss(double logit, double y) {
  return std::max(logit, 0.0) - logit * y + std::log1p(std::exp(-std::abs(logit)));
}

TimestampData slice(const TimestampData& d, int begin, int count) {
  TimestampData out;
  out.dim = d.dim;
  out.n = count;
  out.n_train = 0;
  out.n_val = 0;
  out.n_test = 0;
  out.theta_star = d.theta_star;
  out.x.assign(d.x.begin() + static_cast<std::ptrdiff_t>(begin) * d.dim,
               d.x.begin() + static_cast<std::ptrdiff_t>(begin + count) * d.dim);
  out.y.assign(d.y.begin() + begin, d.y.begin() + begin + count);
  return out;
}

std::vector<double> draw_inputs(GaussianStream& g, int n, int dim) {
  std::vector<double> x(static_cast<std::size_t>(n) * dim);
  for (auto& v : x) v = g.next();
  return x;
}

}  // namespace

void SyntheticTask::validate() const {
  if (dim < 1) raise(Errc::invalid_argument, "dim must be >= 1");
  if (a.size() != static_cast<std::size_t>(dim) || b.size() != a.size() ||
      c.size() != a.size() || d.size() != a.size()) {
    raise(Errc::invalid_argument, "coefficient vectors must all have length dim");
  }
  if (!(noise_sigma >= 0.0)) raise(Errc::invalid_argument, "noise_sigma must be >= 0");
  if (n_train < 1 || n_val < 1 || n_test < 1) {
    raise(Errc::invalid_argument, "sample counts must be >= 1");
  }
  if (t_count < 1) raise(Errc::invalid_argument, "t_count must be >= 1");
}

SyntheticTask SyntheticTask::with_default_coeffs(int dim, std::uint64_t seed) {
  if (dim < 1) raise(Errc::invalid_argument, "dim must be >= 1");
  SyntheticTask task;
  task.dim = dim;
  task.seed = seed;
  task.a.assign(static_cast<std::size_t>(dim), 1.0);
  task.b.assign(static_cast<std::size_t>(dim), 0.5);
  task.c.assign(static_cast<std::size_t>(dim), 0.05);
  task.d.assign(static_cast<std::size_t>(dim), 0.005);
  SplitMix64 coin(stream_seed(seed, seed_domain::init, 0));
  for (int j = 0; j < dim; ++j) {
    if ((coin.next() & 1ull) != 0) {
      task.b[static_cast<std::size_t>(j)] *= -1.0;
      task.c[static_cast<std::size_t>(j)] *= -1.0;
      task.d[static_cast<std::size_t>(j)] *= -1.0;
    }
  }
  return task;
}

TimestampData TimestampData::train() const { return slice(*this, 0, n_train); }
TimestampData TimestampData::val() const { return slice(*this, n_train, n_val); }
TimestampData TimestampData::test() const {
  return slice(*this, n_train + n_val, n_test);
}

std::vector<double> true_params(const SyntheticTask& task, std::int64_t t) {
  task.validate();
  if (t < 0) raise(Errc::invalid_argument, "t must be >= 0");
  const double td = static_cast<double>(t);
  std::vector<double> theta(static_cast<std::size_t>(task.dim));
  for (int j = 0; j < task.dim; ++j) {
    const auto k = static_cast<std::size_t>(j);
    theta[k] = ((task.d[k] * td + task.c[k]) * td + task.b[k]) * td + task.a[k];
  }
  return theta;
}

TimestampData generate(const SyntheticTask& task, std::int64_t t) {
  task.validate();
  TimestampData data;
  data.dim = task.dim;
  data.n_train = task.n_train;
  data.n_val = task.n_val;
  data.n_test = task.n_test;
  data.n = task.n_train + task.n_val + task.n_test;
  data.theta_star = true_params(task, t);

  GaussianStream g(derive_seed(task.seed, t));
  data.x = draw_inputs(g, data.n, data.dim);
  data.y.resize(static_cast<std::size_t>(data.n));
  for (int i = 0; i < data.n; ++i) {
    const double* row = data.x.data() + static_cast<std::size_t>(i) * data.dim;
    double signal = 0.0;
    for (int j = 0; j < data.dim; ++j) signal += row[j] * data.theta_star[static_cast<std::size_t>(j)];
    data.y[static_cast<std::size_t>(i)] = signal + task.noise_sigma * g.next();
  }
  return data;
}

TimestampData generate_logistic(const SyntheticTask& task, std::int64_t t) {
  task.validate();
  TimestampData data;
  data.dim = task.dim;
  data.n_train = task.n_train;
  data.n_val = task.n_val;
  data.n_test = task.n_test;
  data.n = task.n_train + task.n_val + task.n_test;
  data.theta_star = true_params(task, t);

  GaussianStream g(derive_seed(task.seed, t));
  data.x = draw_inputs(g, data.n, data.dim);
  SplitMix64 flips(stream_seed(task.seed, seed_domain::shuffle, t));
  data.y.resize(static_cast<std::size_t>(data.n));
  for (int i = 0; i < data.n; ++i) {
    const double* row = data.x.data() + static_cast<std::size_t>(i) * data.dim;
    double signal = 0.0;
    for (int j = 0; j < data.dim; ++j) signal += row[j] * data.theta_star[static_cast<std::size_t>(j)];
    double label = signal > 0.0 ? 1.0 : 0.0;
    if (flips.uniform() <= 0.05) label = 1.0 - label;
    data.y[static_cast<std::size_t>(i)] = label;
  }
  return data;
}

std::vector<double> fit_ols(const TimestampData& data) {
  const int d = data.dim;
  if (data.n < d) {
    raise(Errc::rank_deficient,
          "need at least dim samples, have " + std::to_string(data.n));
  }
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd xty = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < data.n; ++i) {
    const double* row = data.x.data() + static_cast<std::size_t>(i) * d;
    for (int r = 0; r < d; ++r) {
      xty(r) += row[r] * data.y[static_cast<std::size_t>(i)];
      for (int c = r; c < d; ++c) xtx(r, c) += row[r] * row[c];
    }
  }
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < r; ++c) xtx(r, c) = xtx(c, r);
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
  if (lu.rank() < d) {
    raise(Errc::rank_deficient, "normal equations are rank deficient");
  }
  const Eigen::VectorXd theta = lu.solve(xty);
  return std::vector<double>(theta.data(), theta.data() + d);
}

void MlpSpec::validate() const {
  if (hidden < 1) raise(Errc::invalid_argument, "hidden width must be >= 1");
  if (!(init_scale > 0.0)) raise(Errc::invalid_argument, "init_scale must be > 0");
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) raise(Errc::invalid_argument, "lr must be > 0");
  if (iters < 1) raise(Errc::invalid_argument, "iters must be >= 1");
  if (batch < 1) raise(Errc::invalid_argument, "batch must be >= 1");
}

Checkpoint init_mlp(const MlpSpec& spec, int dim) {
  spec.validate();
  if (dim < 1) raise(Errc::invalid_argument, "dim must be >= 1");
  GaussianStream g(stream_seed(spec.seed, seed_domain::init, 0));
  const auto h = static_cast<std::size_t>(spec.hidden);
  const auto d = static_cast<std::size_t>(dim);
  Tensor w1{"w1",
            {static_cast<std::uint64_t>(spec.hidden), static_cast<std::uint64_t>(dim)},
            std::vector<double>(h * d)};
  Tensor b1{"b1", {static_cast<std::uint64_t>(spec.hidden)}, std::vector<double>(h)};
  Tensor w2{"w2", {static_cast<std::uint64_t>(spec.hidden)}, std::vector<double>(h)};
  Tensor b2{"b2", {1}, std::vector<double>(1)};
  for (auto& v : w1.values) v = spec.init_scale * g.next();
  for (auto& v : b1.values) v = spec.init_scale * g.next();
  for (auto& v : w2.values) v = spec.init_scale * g.next();
  for (auto& v : b2.values) v = spec.init_scale * g.next();
  return Checkpoint({std::move(w1), std::move(b1), std::move(w2), std::move(b2)});
}

double mlp_loss(const Checkpoint& c, const TimestampData& data, Loss loss) {
  const MlpParams p = mlp_view(c);
  if (p.dim != data.dim) raise(Errc::congruence_error, "input dimension mismatch");
  std::vector<double> act(static_cast<std::size_t>(p.hidden));
  double total = 0.0;
  for (int i = 0; i < data.n; ++i) {
    const double out = forward_one(p, data.x.data() + static_cast<std::size_t>(i) * p.dim, act);
    const double y = data.y[static_cast<std::size_t>(i)];
    if (loss == Loss::mse) {
      total += (out - y) * (out - y);
    } else {
      total += logistic_loss(out, y);
    }
  }
  return total / static_cast<double>(data.n);
}

Checkpoint train_mlp(const TimestampData& data, const MlpSpec& spec,
                     const TrainConfig& cfg,
                     const std::optional<Checkpoint>& warm_start) {
  spec.validate();
  cfg.validate();
  Checkpoint start = warm_start ? *warm_start : init_mlp(spec, data.dim);
  {
    const MlpParams p = mlp_view(start);
    if (p.hidden != spec.hidden || p.dim != data.dim) {
      raise(Errc::congruence_error, "warm start does not match spec and data");
    }
  }

  // Mutable copies of the four tensors.
  std::vector<double> w1 = start.find("w1")->values;
  std::vector<double> b1 = start.find("b1")->values;
  std::vector<double> w2 = start.find("w2")->values;
  std::vector<double> b2 = start.find("b2")->values;
  const int h = spec.hidden;
  const int d = data.dim;
  const int n = data.n;
  const int batch = std::min(cfg.batch, n);

  SplitMix64 shuffler(stream_seed(cfg.seed, seed_domain::shuffle, 0));
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = static_cast<std::size_t>(n);  // forces a shuffle first

  std::vector<double> act(static_cast<std::size_t>(h));
  std::vector<double> gw1(w1.size()), gb1(b1.size()), gw2(w2.size());
  double gb2 = 0.0;

  for (int iter = 0; iter < cfg.iters; ++iter) {
    std::fill(gw1.begin(), gw1.end(), 0.0);
    std::fill(gb1.begin(), gb1.end(), 0.0);
    std::fill(gw2.begin(), gw2.end(), 0.0);
    gb2 = 0.0;

    double batch_loss = 0.0;
    for (int b = 0; b < batch; ++b) {
      if (cursor >= static_cast<std::size_t>(n)) {
        // Fisher-Yates pass over the index order, one per epoch.
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
          const std::size_t j = i + static_cast<std::size_t>(
                                        shuffler.next() % static_cast<std::uint64_t>(n - static_cast<int>(i)));
          std::swap(order[i], order[j]);
        }
        cursor = 0;
      }
      const std::size_t row_idx = order[cursor++];
      const double* row = data.x.data() + row_idx * static_cast<std::size_t>(d);
      const double y = data.y[row_idx];

      double out = b2[0];
      for (int k = 0; k < h; ++k) {
        double z = b1[static_cast<std::size_t>(k)];
        const double* wrow = w1.data() + static_cast<std::size_t>(k) * d;
        for (int j = 0; j < d; ++j) z += wrow[j] * row[j];
        act[static_cast<std::size_t>(k)] = std::tanh(z);
        out += w2[static_cast<std::size_t>(k)] * act[static_cast<std::size_t>(k)];
      }

      double dout;
      if (cfg.loss == Loss::mse) {
        const double err = out - y;
        batch_loss += err * err;
        dout = 2.0 * err;
      } else {
        batch_loss += logistic_loss(out, y);
        dout = sigmoid(out) - y;
      }

      gb2 += dout;
      for (int k = 0; k < h; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        const double a = act[ks];
        gw2[ks] += dout * a;
        const double dz = dout * w2[ks] * (1.0 - a * a);
        gb1[ks] += dz;
        double* grow = gw1.data() + ks * static_cast<std::size_t>(d);
        for (int j = 0; j < d; ++j) grow[j] += dz * row[j];
      }
    }

    if (!std::isfinite(batch_loss)) {
      raise(Errc::divergence, "training loss became non-finite");
    }
    const double scale = cfg.lr / static_cast<double>(batch);
    for (std::size_t i = 0; i < w1.size(); ++i) w1[i] -= scale * gw1[i];
    for (std::size_t i = 0; i < b1.size(); ++i) b1[i] -= scale * gb1[i];
    for (std::size_t i = 0; i < w2.size(); ++i) w2[i] -= scale * gw2[i];
    b2[0] -= scale * gb2;
  }

  for (const auto* vec : {&w1, &b1, &w2, &b2}) {
    for (double v : *vec) {
      if (!std::isfinite(v)) raise(Errc::divergence, "parameters became non-finite");
    }
  }

  std::vector<Tensor> tensors;
  tensors.push_back({"w1", start.find("w1")->shape, std::move(w1)});
  tensors.push_back({"b1", start.find("b1")->shape, std::move(b1)});
  tensors.push_back({"w2", start.find("w2")->shape, std::move(w2)});
  tensors.push_back({"b2", start.find("b2")->shape, std::move(b2)});
  return Checkpoint(std::move(tensors), start.timestamp(), start.dtype());
}

Trajectory run_continual(const SyntheticTask& task, const Learner& learner,
                         const TrainConfig& cfg) {
  task.validate();
  std::vector<Checkpoint> checkpoints;
  checkpoints.reserve(static_cast<std::size_t>(task.t_count));

  std::optional<Checkpoint> base;
  if (learner.kind == LearnerKind::mlp) {
    base = init_mlp(learner.mlp, task.dim);
  }
  std::optional<Checkpoint> previous;

  for (int t = 1; t <= task.t_count; ++t) {
    const TimestampData data = cfg.loss == Loss::cross_entropy
                                   ? generate_logistic(task, t)
                                   : generate(task, t);
    const TimestampData train = data.train();
    Checkpoint ck;
    if (learner.kind == LearnerKind::ols) {
      std::vector<double> theta = fit_ols(train);
      Tensor tensor{"theta", {static_cast<std::uint64_t>(task.dim)}, std::move(theta)};
      ck = Checkpoint({std::move(tensor)}, t);
    } else {
      TrainConfig step_cfg = cfg;
      step_cfg.seed = derive_seed(cfg.seed, t);
      const std::optional<Checkpoint>& warm =
          (cfg.init == InitMode::from_previous && previous) ? previous : base;
      ck = train_mlp(train, learner.mlp, step_cfg, warm).with_timestamp(t);
    }
    previous = ck;
    checkpoints.push_back(std::move(ck));
  }
  return Trajectory(std::move(checkpoints), 1);
}

Checkpoint permute_hidden(const Checkpoint& c, const MlpSpec& spec,
                          std::span<const std::size_t> perm) {
  const MlpParams p = mlp_view(c);
  if (p.hidden != spec.hidden) {
    raise(Errc::congruence_error, "checkpoint hidden width does not match spec");
  }
  const auto h = static_cast<std::size_t>(p.hidden);
  if (perm.size() != h) {
    raise(Errc::bad_permutation, "permutation length must equal the hidden width");
  }
  std::vector<bool> seen(h, false);
  for (std::size_t v : perm) {
    if (v >= h || seen[v]) raise(Errc::bad_permutation, "not a permutation");
    seen[v] = true;
  }

  const auto d = static_cast<std::size_t>(p.dim);
  Tensor w1{"w1", p.w1->shape, std::vector<double>(h * d)};
  Tensor b1{"b1", p.b1->shape, std::vector<double>(h)};
  Tensor w2{"w2", p.w2->shape, std::vector<double>(h)};
  Tensor b2{"b2", p.b2->shape, p.b2->values};
  for (std::size_t i = 0; i < h; ++i) {
    const std::size_t src = perm[i];
    std::copy_n(p.w1->values.begin() + static_cast<std::ptrdiff_t>(src * d), d,
                w1.values.begin() + static_cast<std::ptrdiff_t>(i * d));
    b1.values[i] = p.b1->values[src];
    w2.values[i] = p.w2->values[src];
  }
  return Checkpoint({std::move(w1), std::move(b1), std::move(w2), std::move(b2)},
                    c.timestamp(), c.dtype());
}

std::vector<double> predict(const Checkpoint& c, ModelKind kind,
                            const TimestampData& data) {
  std::vector<double> out(static_cast<std::size_t>(data.n));
  if (kind == ModelKind::linear) {
    const Tensor* theta = c.find("theta");
    if (!theta || theta->shape.size() != 1 ||
        static_cast<int>(theta->shape[0]) != data.dim) {
      raise(Errc::congruence_error, "checkpoint does not hold a matching 'theta'");
    }
    for (int i = 0; i < data.n; ++i) {
      const double* row = data.x.data() + static_cast<std::size_t>(i) * data.dim;
      double v = 0.0;
      for (int j = 0; j < data.dim; ++j) v += row[j] * theta->values[static_cast<std::size_t>(j)];
      out[static_cast<std::size_t>(i)] = v;
    }
    return out;
  }
  const MlpParams p = mlp_view(c);
  if (p.dim != data.dim) raise(Errc::congruence_error, "input dimension mismatch");
  std::vector<double> act(static_cast<std::size_t>(p.hidden));
  for (int i = 0; i < data.n; ++i) {
    out[static_cast<std::size_t>(i)] =
        forward_one(p, data.x.data() + static_cast<std::size_t>(i) * p.dim, act);
  }
  return out;
}

double evaluate_forecast(const Checkpoint& pred, const TimestampData& future,
                         ModelKind kind) {
  const std::vector<double> yhat = predict(pred, kind, future);
  double total = 0.0;
  for (int i = 0; i < future.n; ++i) {
    const double e = yhat[static_cast<std::size_t>(i)] - future.y[static_cast<std::size_t>(i)];
    total += e * e;
  }
  return total / static_cast<double>(future.n);
}

}  // namespace tg
