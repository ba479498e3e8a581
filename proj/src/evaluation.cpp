#include "tg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <Eigen/Dense>

namespace tg {

FwtMatrix::FwtMatrix(Direction direction, int delta, std::int64_t t_min,
                     std::int64_t t_max)
    : direction_(direction), delta_(delta), t_min_(t_min), t_max_(t_max) {
  if (delta_ < 1) raise(Errc::invalid_argument, "delta must be >= 1");
  if (t_max_ < t_min_) raise(Errc::invalid_argument, "empty timestamp range");
}

void FwtMatrix::set(std::int64_t t, std::int64_t j, double value) {
  if (t < t_min_ || t > t_max_) {
    raise(Errc::invalid_argument, "t outside the matrix row range");
  }
  if (j <= t || j > t + delta_) {
    raise(Errc::invalid_argument, "need t < j <= t + delta");
  }
  if (!std::isfinite(value)) {
    raise(Errc::invalid_argument, "matrix entries must be finite");
  }
  entries_[{t, j}] = value;
}

namespace {

// Mean that returns a shared value exactly when every summand equals it.
double exact_aware_mean(double sum, double first, bool all_equal, double count) {
  return all_equal ? first : sum / count;
}

}  // namespace

double avg_fwt(const FwtMatrix& m) {
  if (m.empty()) raise(Errc::empty_matrix, "no entries");
  double sum = 0.0;
  const double first = m.entries().begin()->second;
  bool all_equal = true;
  for (const auto& [key, value] : m.entries()) {
    sum += value;
    all_equal = all_equal && value == first;
  }
  return exact_aware_mean(sum, first, all_equal,
                          static_cast<double>(m.entries().size()));
}

double worst_fwt(const FwtMatrix& m) {
  if (m.empty()) raise(Errc::empty_matrix, "no entries");
  double sum = 0.0;
  double first = 0.0;
  bool all_equal = true;
  std::int64_t rows = 0;
  auto it = m.entries().begin();
  for (std::int64_t t = m.t_min(); t <= m.t_max(); ++t) {
    bool seen = false;
    double worst = 0.0;
    while (it != m.entries().end() && it->first.first == t) {
      const double v = it->second;
      if (!seen) {
        worst = v;
        seen = true;
      } else if (m.direction() == Direction::higher_better) {
        worst = std::min(worst, v);
      } else {
        worst = std::max(worst, v);
      }
      ++it;
    }
    if (!seen) {
      raise(Errc::missing_row, "no entries for t = " + std::to_string(t));
    }
    if (rows == 0) first = worst;
    all_equal = all_equal && worst == first;
    sum += worst;
    ++rows;
  }
  return exact_aware_mean(sum, first, all_equal, static_cast<double>(rows));
}

std::vector<std::pair<std::int64_t, double>> norm_curve(const Trajectory& traj) {
  std::vector<std::pair<std::int64_t, double>> curve;
  curve.reserve(traj.size());
  for (const auto& c : traj.checkpoints()) {
    curve.emplace_back(c.timestamp(), l2_norm(c));
  }
  return curve;
}

Projection pca_project(const Trajectory& traj) {
  const std::size_t rows = traj.size();
  if (rows < 3) raise(Errc::invalid_argument, "projection needs >= 3 checkpoints");

  bool all_identical = true;
  for (std::size_t i = 1; i < rows && all_identical; ++i) {
    all_identical = traj[i].with_timestamp(0) == traj[0].with_timestamp(0);
  }
  if (all_identical) {
    raise(Errc::degenerate_trajectory, "all checkpoints are identical");
  }

  const std::size_t n = traj[0].total_size();
  std::vector<FlatView> flats;
  flats.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) flats.push_back(flatten(traj[i]));

  std::vector<double> mean(n, 0.0);
  for (const auto& fv : flats) {
    for (std::size_t k = 0; k < n; ++k) mean[k] += fv.values[k];
  }
  for (auto& v : mean) v /= static_cast<double>(rows);

  // Gram matrix of the centered rows; eigenvectors give the PC scores
  // directly (X = U S V^T implies X X^T = U S^2 U^T and scores = U S).
  Eigen::MatrixXd gram(rows, rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = i; j < rows; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        dot += (flats[i].values[k] - mean[k]) * (flats[j].values[k] - mean[k]);
      }
      gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = dot;
      gram(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = dot;
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) {
    raise(Errc::degenerate_trajectory, "eigendecomposition failed");
  }
  const auto& eigenvalues = solver.eigenvalues();  // ascending
  double total = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    total += std::max(eigenvalues(i), 0.0);
  }
  if (total <= 0.0) {
    raise(Errc::degenerate_trajectory, "no variance across checkpoints");
  }

  Projection p;
  p.mean = std::move(mean);
  p.points.assign(rows, {0.0, 0.0});
  const Eigen::Index last = eigenvalues.size() - 1;
  for (int axis = 0; axis < 2; ++axis) {
    const Eigen::Index idx = last - axis;
    const double lambda = std::max(eigenvalues(idx), 0.0);
    p.explained_variance[static_cast<std::size_t>(axis)] = lambda / total;
    const double sigma = std::sqrt(lambda);
    Eigen::VectorXd scores = solver.eigenvectors().col(idx) * sigma;
    double flip = 1.0;
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
      if (scores(i) != 0.0) {
        flip = scores(i) > 0.0 ? 1.0 : -1.0;
        break;
      }
    }
    for (std::size_t i = 0; i < rows; ++i) {
      p.points[i][static_cast<std::size_t>(axis)] =
          flip * scores(static_cast<Eigen::Index>(i));
    }
  }
  return p;
}

double kendall_tau(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    raise(Errc::invalid_argument, "sequences must have equal length");
  }
  const std::size_t n = xs.size();
  if (n < 2) raise(Errc::invalid_argument, "need at least two observations");
  std::int64_t concordant = 0;
  std::int64_t discordant = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = xs[j] - xs[i];
      const double dy = ys[j] - ys[i];
      const double prod = dx * dy;
      if (prod > 0.0) ++concordant;
      if (prod < 0.0) ++discordant;
    }
  }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return static_cast<double>(concordant - discordant) / pairs;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_fwt_csv(const FwtMatrix& m, std::ostream& out) {
  out << "t,j,value\n";
  for (const auto& [key, value] : m.entries()) {
    out << key.first << ',' << key.second << ',' << format_double(value) << '\n';
  }
}

void write_norm_csv(std::span<const std::pair<std::int64_t, double>> curve,
                    std::ostream& out) {
  out << "t,l2_norm\n";
  for (const auto& [t, norm] : curve) {
    out << t << ',' << format_double(norm) << '\n';
  }
}

void write_projection_csv(const Trajectory& traj, const Projection& p,
                          std::ostream& out) {
  out << "t,pc1,pc2\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out << traj[i].timestamp() << ',' << format_double(p.points[i][0]) << ','
        << format_double(p.points[i][1]) << '\n';
  }
}

}  // namespace tg
