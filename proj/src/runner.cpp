#include "tg/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tg/evaluation.hpp"
#include "tg/rng.hpp"

namespace tg {
namespace {

using nlohmann::json;

[[noreturn]] void manifest_fail(const std::string& where, const std::string& what) {
  raise(Errc::manifest_error, where + ": " + what);
}

void require_fields(const json& obj, const std::string& where,
                    std::initializer_list<const char*> required,
                    std::initializer_list<const char*> optional = {}) {
  if (!obj.is_object()) manifest_fail(where, "expected an object");
  for (const char* field : required) {
    if (!obj.contains(field)) {
      manifest_fail(where, std::string("missing required field '") + field + "'");
    }
  }
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const auto known = [&](std::initializer_list<const char*> names) {
      return std::any_of(names.begin(), names.end(),
                         [&](const char* n) { return it.key() == n; });
    };
    if (!known(required) && !known(optional)) {
      manifest_fail(where, "unknown field '" + it.key() + "'");
    }
  }
}

template <typename T>
T field(const json& obj, const std::string& where, const char* name) {
  try {
    return obj.at(name).get<T>();
  } catch (const json::exception&) {
    manifest_fail(where, std::string("field '") + name + "' has the wrong type");
  }
}

template <typename T>
T field_or(const json& obj, const std::string& where, const char* name, T fallback) {
  if (!obj.contains(name)) return fallback;
  return field<T>(obj, where, name);
}

std::vector<double> coeff_vector(const json& obj, const std::string& where,
                                 const char* name, int dim) {
  auto v = field<std::vector<double>>(obj, where, name);
  if (v.size() != static_cast<std::size_t>(dim)) {
    manifest_fail(where, std::string("'") + name + "' must have length dim");
  }
  return v;
}

SyntheticTask parse_task(const json& obj) {
  const std::string where = "task.synthetic";
  require_fields(obj, where, {"dim", "t_count"},
                 {"noise_sigma", "n_train", "n_val", "n_test", "coeffs"});
  SyntheticTask task;
  task.dim = field<int>(obj, where, "dim");
  task.t_count = field<int>(obj, where, "t_count");
  task.noise_sigma = field_or<double>(obj, where, "noise_sigma", task.noise_sigma);
  task.n_train = field_or<int>(obj, where, "n_train", task.n_train);
  task.n_val = field_or<int>(obj, where, "n_val", task.n_val);
  task.n_test = field_or<int>(obj, where, "n_test", task.n_test);
  if (obj.contains("coeffs")) {
    const auto& coeffs = obj.at("coeffs");
    require_fields(coeffs, "task.synthetic.coeffs", {"a", "b", "c", "d"});
    task.a = coeff_vector(coeffs, where, "a", task.dim);
    task.b = coeff_vector(coeffs, where, "b", task.dim);
    task.c = coeff_vector(coeffs, where, "c", task.dim);
    task.d = coeff_vector(coeffs, where, "d", task.dim);
  } else {
    const auto defaults = SyntheticTask::with_default_coeffs(task.dim, 0);
    task.a = defaults.a;
    task.b = defaults.b;
    task.c = defaults.c;
    task.d = defaults.d;
  }
  return task;
}

Learner parse_learner(const json& obj) {
  const std::string where = "task.learner";
  require_fields(obj, where, {"kind"}, {"hidden", "init_scale"});
  Learner learner;
  const auto kind = field<std::string>(obj, where, "kind");
  if (kind == "ols") {
    learner.kind = LearnerKind::ols;
    if (obj.contains("hidden") || obj.contains("init_scale")) {
      manifest_fail(where, "'hidden'/'init_scale' apply to the mlp learner only");
    }
  } else if (kind == "mlp") {
    learner.kind = LearnerKind::mlp;
    learner.mlp.hidden = field_or<int>(obj, where, "hidden", learner.mlp.hidden);
    learner.mlp.init_scale =
        field_or<double>(obj, where, "init_scale", learner.mlp.init_scale);
  } else {
    manifest_fail(where, "kind must be 'ols' or 'mlp'");
  }
  return learner;
}

TrainConfig parse_train(const json& obj) {
  const std::string where = "task.train";
  require_fields(obj, where, {}, {"loss", "lr", "iters", "batch", "init"});
  TrainConfig cfg;
  const auto loss = field_or<std::string>(obj, where, "loss", "mse");
  if (loss == "mse") {
    cfg.loss = Loss::mse;
  } else if (loss == "cross_entropy") {
    cfg.loss = Loss::cross_entropy;
  } else {
    manifest_fail(where, "loss must be 'mse' or 'cross_entropy'");
  }
  cfg.lr = field_or<double>(obj, where, "lr", cfg.lr);
  cfg.iters = field_or<int>(obj, where, "iters", cfg.iters);
  cfg.batch = field_or<int>(obj, where, "batch", cfg.batch);
  const auto init = field_or<std::string>(obj, where, "init", "from_previous");
  if (init == "from_previous") {
    cfg.init = InitMode::from_previous;
  } else if (init == "from_base") {
    cfg.init = InitMode::from_base;
  } else {
    manifest_fail(where, "init must be 'from_previous' or 'from_base'");
  }
  return cfg;
}

SearchSpace parse_search_space(const json& obj, const std::string& where) {
  require_fields(obj, where, {"kind", "lo", "hi", "count"}, {"seed"});
  SearchSpace space;
  const auto kind = field<std::string>(obj, where, "kind");
  if (kind == "grid") {
    space.kind = SearchSpace::Kind::grid;
  } else if (kind == "random") {
    space.kind = SearchSpace::Kind::random;
  } else {
    manifest_fail(where, "kind must be 'grid' or 'random'");
  }
  space.lo = field<double>(obj, where, "lo");
  space.hi = field<double>(obj, where, "hi");
  space.count = field<int>(obj, where, "count");
  space.seed = field_or<std::uint64_t>(obj, where, "seed", 0);
  try {
    space.validate();
  } catch (const Error& e) {
    manifest_fail(where, e.what());
  }
  return space;
}

ManifestMethod parse_method(const json& obj, std::size_t index) {
  const std::string where = "methods[" + std::to_string(index) + "]";
  require_fields(obj, where, {"id"},
                 {"label", "alpha", "decay", "lookback", "lambda", "horizon", "lr",
                  "max_iters", "tol", "eps", "tuning"});
  ManifestMethod method;
  try {
    method.spec.kind = method_kind_from_name(field<std::string>(obj, where, "id"));
  } catch (const Error& e) {
    manifest_fail(where, e.what());
  }
  method.spec.label = field_or<std::string>(obj, where, "label", "");
  method.spec.alpha = field_or<double>(obj, where, "alpha", method.spec.alpha);
  method.spec.decay = field_or<double>(obj, where, "decay", method.spec.decay);
  method.spec.lookback = field_or<int>(obj, where, "lookback", method.spec.lookback);
  auto& learned = method.spec.learned;
  learned.lambda = field_or<double>(obj, where, "lambda", learned.lambda);
  learned.horizon = field_or<int>(obj, where, "horizon", learned.horizon);
  learned.lr = field_or<double>(obj, where, "lr", learned.lr);
  learned.max_iters = field_or<int>(obj, where, "max_iters", learned.max_iters);
  learned.tol = field_or<double>(obj, where, "tol", learned.tol);
  learned.eps = field_or<double>(obj, where, "eps", learned.eps);
  if (obj.contains("tuning")) {
    if (!tunable(method.spec.kind)) {
      manifest_fail(where, "method '" + std::string(method.spec.name()) +
                               "' has no tunable scalar");
    }
    method.tuning = parse_search_space(obj.at("tuning"), where + ".tuning");
  }
  return method;
}

// ---------------------------------------------------------------------------
// Output plumbing
// ---------------------------------------------------------------------------

/// Collects a full file in memory, then writes it atomically
/// (write temp + rename) on commit.
class AtomicFile {
 public:
  AtomicFile(std::filesystem::path path) : path_(std::move(path)) {}

  std::ostringstream& stream() { return buffer_; }

  void commit() {
    const auto tmp = path_.string() + ".tmp";
    {
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      if (!f) raise(Errc::io_error, "cannot write " + tmp);
      const std::string body = buffer_.str();
      f.write(body.data(), static_cast<std::streamsize>(body.size()));
      if (!f) raise(Errc::io_error, "write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path_);
  }

 private:
  std::filesystem::path path_;
  std::ostringstream buffer_;
};

const char* bool_name(bool v) { return v ? "true" : "false"; }

struct CellResult {
  std::int64_t t;
  std::int64_t j;
  double value;
};

struct MethodRun {
  std::string method;
  std::vector<CellResult> cells;
  std::vector<std::pair<std::int64_t, double>> alphas;  // per anchor t
  double avg = 0.0;
  double worst = 0.0;
};

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<MethodRun> methods;
  std::vector<std::pair<std::int64_t, double>> norms;
  std::optional<Projection> projection;
  std::vector<std::int64_t> timestamps;
};

SeedRun run_seed(const ExperimentManifest& manifest, const RunOptions& options,
                 std::uint64_t seed) {
  SeedRun out;
  out.seed = seed;

  SyntheticTask task = *manifest.task;
  task.seed = seed;
  Learner learner = manifest.learner;
  learner.mlp.seed = seed;
  TrainConfig train = manifest.train;
  train.seed = seed;

  const Trajectory traj = run_continual(task, learner, train);
  const ModelKind model_kind =
      learner.kind == LearnerKind::ols ? ModelKind::linear : ModelKind::mlp;
  const int total = task.t_count;

  std::vector<TimestampData> data;
  data.reserve(static_cast<std::size_t>(total) + 1);
  for (int t = 0; t <= total; ++t) {
    // Index 0 is unused; timestamps are 1-based.
    data.push_back(t == 0 ? TimestampData{}
                          : (train.loss == Loss::cross_entropy
                                 ? generate_logistic(task, t)
                                 : generate(task, t)));
  }

  for (const auto& method : manifest.methods) {
    MethodRun run;
    run.method = std::string(method.spec.name());
    const auto start = static_cast<std::int64_t>(min_history(method.spec));
    if (start > total - 1) {
      raise(Errc::insufficient_history,
            "method '" + run.method + "' needs " + std::to_string(start) +
                " checkpoints before the first forecast; task has " +
                std::to_string(total) + " timestamps");
    }
    FwtMatrix matrix(Direction::lower_better, manifest.delta, start,
                     static_cast<std::int64_t>(total) - 1);

    for (std::int64_t t = start; t <= total - 1; ++t) {
      const Trajectory history = traj.prefix(static_cast<std::size_t>(t));
      MethodSpec spec = method.spec;
      if (method.tuning) {
        // Honest protocol: candidates are scored on the current validation
        // split. The future-oracle diagnostic peeks one step ahead instead.
        const std::int64_t val_t = options.oracle_future ? std::min<std::int64_t>(
                                                               t + 1, total)
                                                         : t;
        const TimestampData val = data[static_cast<std::size_t>(val_t)].val();
        const auto selection = select_alpha(
            history, spec, *method.tuning, [&](const Checkpoint& candidate) {
              return evaluate_forecast(candidate, val, model_kind);
            });
        spec.alpha = selection.alpha_star;
        if (spec.kind == MethodSpec::Kind::ema) spec.decay = selection.alpha_star;
        run.alphas.emplace_back(t, selection.alpha_star);
      }
      const Forecaster forecaster(history, spec);
      const std::int64_t horizon =
          std::min<std::int64_t>(manifest.delta, total - t);
      for (std::int64_t k = 1; k <= horizon; ++k) {
        const double mse = evaluate_forecast(
            forecaster.at(k), data[static_cast<std::size_t>(t + k)].test(),
            model_kind);
        matrix.set(t, t + k, mse);
        run.cells.push_back({t, t + k, mse});
      }
    }
    run.avg = avg_fwt(matrix);
    run.worst = worst_fwt(matrix);
    out.methods.push_back(std::move(run));
  }

  out.norms = norm_curve(traj);
  for (const auto& c : traj.checkpoints()) out.timestamps.push_back(c.timestamp());
  if (traj.size() >= 3) {
    try {
      out.projection = pca_project(traj);
    } catch (const Error& e) {
      if (e.code() != Errc::degenerate_trajectory) throw;
    }
  }
  return out;
}

void write_outputs(const ExperimentManifest& manifest, const RunOptions& options,
                   const std::vector<SeedRun>& runs) {
  const auto& dir = manifest.output_dir;
  const std::string oracle = bool_name(options.oracle_future);

  AtomicFile results(dir / "results.csv");
  results.stream() << "method,seed,t,j,value,oracle\n";
  AtomicFile summary(dir / "summary.csv");
  summary.stream() << "method,seed,avg_fwt,worst_fwt,oracle\n";
  AtomicFile alphas(dir / "alphas.csv");
  alphas.stream() << "method,seed,t,alpha_star,oracle\n";
  AtomicFile norms(dir / "norms.csv");
  norms.stream() << "seed,t,l2_norm\n";
  AtomicFile pca(dir / "pca.csv");
  pca.stream() << "seed,t,pc1,pc2\n";

  for (const auto& run : runs) {
    for (const auto& method : run.methods) {
      for (const auto& cell : method.cells) {
        results.stream() << method.method << ',' << run.seed << ',' << cell.t << ','
                         << cell.j << ',' << format_double(cell.value) << ','
                         << oracle << '\n';
      }
      summary.stream() << method.method << ',' << run.seed << ','
                       << format_double(method.avg) << ','
                       << format_double(method.worst) << ',' << oracle << '\n';
      for (const auto& [t, alpha] : method.alphas) {
        alphas.stream() << method.method << ',' << run.seed << ',' << t << ','
                        << format_double(alpha) << ',' << oracle << '\n';
      }
    }
    for (const auto& [t, norm] : run.norms) {
      norms.stream() << run.seed << ',' << t << ',' << format_double(norm) << '\n';
    }
    if (run.projection) {
      for (std::size_t i = 0; i < run.projection->points.size(); ++i) {
        pca.stream() << run.seed << ',' << run.timestamps[i] << ','
                     << format_double(run.projection->points[i][0]) << ','
                     << format_double(run.projection->points[i][1]) << '\n';
      }
    }
  }

  results.commit();
  summary.commit();
  alphas.commit();
  norms.commit();
  pca.commit();
}

void run_trajectory_analytics(const ExperimentManifest& manifest) {
  const Trajectory traj = load_trajectory(*manifest.trajectory_manifest);
  const auto& dir = manifest.output_dir;

  AtomicFile norms(dir / "norms.csv");
  norms.stream() << "seed,t,l2_norm\n";
  for (const auto& [t, norm] : norm_curve(traj)) {
    norms.stream() << 0 << ',' << t << ',' << format_double(norm) << '\n';
  }
  norms.commit();

  AtomicFile pca(dir / "pca.csv");
  pca.stream() << "seed,t,pc1,pc2\n";
  if (traj.size() >= 3) {
    try {
      const Projection projection = pca_project(traj);
      for (std::size_t i = 0; i < traj.size(); ++i) {
        pca.stream() << 0 << ',' << traj[i].timestamp() << ','
                     << format_double(projection.points[i][0]) << ','
                     << format_double(projection.points[i][1]) << '\n';
      }
    } catch (const Error& e) {
      if (e.code() != Errc::degenerate_trajectory) throw;
    }
  }
  pca.commit();
}

// Minimal reader for the CSVs this module writes (no quoting or embedded
// commas by construction).
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                               const std::string& expected_header) {
  std::ifstream f(path);
  if (!f) raise(Errc::io_error, "missing input: " + path.string());
  std::string line;
  if (!std::getline(f, line)) raise(Errc::format_error, "empty file: " + path.string());
  if (line != expected_header) {
    raise(Errc::format_error, "unexpected header in " + path.string());
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t begin = 0;
    while (true) {
      const auto comma = line.find(',', begin);
      fields.push_back(line.substr(begin, comma - begin));
      if (comma == std::string::npos) break;
      begin = comma + 1;
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

ExperimentManifest ExperimentManifest::parse_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) raise(Errc::manifest_error, "cannot open manifest: " + path.string());
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::exception& e) {
    manifest_fail(path.string(), std::string("not valid JSON: ") + e.what());
  }

  require_fields(doc, "manifest", {"task", "methods", "delta", "seeds", "output_dir"});

  ExperimentManifest manifest;
  const auto& task_obj = doc.at("task");
  if (!task_obj.is_object()) manifest_fail("task", "expected an object");
  if (task_obj.contains("trajectory_manifest")) {
    require_fields(task_obj, "task", {"trajectory_manifest"});
    manifest.trajectory_manifest =
        path.parent_path() /
        field<std::string>(task_obj, "task", "trajectory_manifest");
  } else {
    require_fields(task_obj, "task", {"synthetic", "learner"}, {"train"});
    manifest.task = parse_task(task_obj.at("synthetic"));
    manifest.learner = parse_learner(task_obj.at("learner"));
    if (task_obj.contains("train")) {
      manifest.train = parse_train(task_obj.at("train"));
    }
    if (manifest.learner.kind == LearnerKind::ols &&
        manifest.train.loss == Loss::cross_entropy) {
      manifest_fail("task", "cross_entropy requires the mlp learner");
    }
  }

  const auto& methods = doc.at("methods");
  if (!methods.is_array() || methods.empty()) {
    manifest_fail("methods", "need at least one method");
  }
  std::set<std::string> labels;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    auto method = parse_method(methods[i], i);
    if (!labels.insert(std::string(method.spec.name())).second) {
      manifest_fail("methods", "duplicate method label '" +
                                   std::string(method.spec.name()) + "'");
    }
    manifest.methods.push_back(std::move(method));
  }

  manifest.delta = field<int>(doc, "manifest", "delta");
  if (manifest.delta < 1) manifest_fail("delta", "must be >= 1");
  manifest.seeds = field<std::vector<std::uint64_t>>(doc, "manifest", "seeds");
  if (manifest.seeds.empty()) manifest_fail("seeds", "must be non-empty");
  manifest.output_dir =
      path.parent_path() / field<std::string>(doc, "manifest", "output_dir");

  if (manifest.task) {
    try {
      manifest.task->validate();
      manifest.train.validate();
      if (manifest.learner.kind == LearnerKind::mlp) manifest.learner.mlp.validate();
    } catch (const Error& e) {
      manifest_fail("task", e.what());
    }
    if (manifest.task->t_count < 2) {
      manifest_fail("task", "t_count must be >= 2 to evaluate any future step");
    }
  }
  return manifest;
}

void run_experiment(const ExperimentManifest& manifest, const RunOptions& options) {
  std::filesystem::create_directories(manifest.output_dir);
  try {
    if (manifest.trajectory_manifest) {
      run_trajectory_analytics(manifest);
      return;
    }

    // Snapshots are written after every completed seed so a late failure
    // still leaves the finished seeds' outputs on disk; the final snapshot
    // is the complete, deterministic result.
    std::vector<SeedRun> runs;
    runs.reserve(manifest.seeds.size());
    const int threads =
        std::max(1, std::min<int>(options.threads,
                                  static_cast<int>(manifest.seeds.size())));
    if (threads == 1) {
      for (std::uint64_t seed : manifest.seeds) {
        const auto start = std::chrono::steady_clock::now();
        runs.push_back(run_seed(manifest, options, seed));
        write_outputs(manifest, options, runs);
        std::fprintf(stderr, "tg: seed %llu done in %.2fs\n",
                     static_cast<unsigned long long>(seed),
                     std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count());
      }
    } else {
      // Seeds are independent; results are assembled in seed order so the
      // output bytes do not depend on scheduling.
      std::vector<std::future<SeedRun>> futures;
      futures.reserve(manifest.seeds.size());
      std::size_t next = 0;
      while (next < manifest.seeds.size() || !futures.empty()) {
        while (next < manifest.seeds.size() &&
               futures.size() < static_cast<std::size_t>(threads)) {
          futures.push_back(std::async(std::launch::async, run_seed,
                                       std::cref(manifest), std::cref(options),
                                       manifest.seeds[next]));
          ++next;
        }
        runs.push_back(futures.front().get());
        futures.erase(futures.begin());
        write_outputs(manifest, options, runs);
      }
    }
  } catch (const std::exception& e) {
    std::ofstream marker(manifest.output_dir / "FAILED");
    marker << e.what() << "\n";
    throw;
  }
}

void run_synth(const SynthOptions& options) {
  options.task.validate();
  const Trajectory traj = run_continual(options.task, options.learner, options.train);
  save_trajectory(traj, options.out_dir);

  for (int t = 1; t <= options.task.t_count; ++t) {
    const TimestampData data = options.train.loss == Loss::cross_entropy
                                   ? generate_logistic(options.task, t)
                                   : generate(options.task, t);
    char name[32];
    std::snprintf(name, sizeof(name), "data_%05d.csv", t);
    AtomicFile file(options.out_dir / name);
    auto& out = file.stream();
    for (int j = 0; j < data.dim; ++j) out << 'x' << (j + 1) << ',';
    out << "y,split\n";
    for (int i = 0; i < data.n; ++i) {
      const char* split = i < data.n_train              ? "train"
                          : i < data.n_train + data.n_val ? "val"
                                                          : "test";
      for (int j = 0; j < data.dim; ++j) {
        out << format_double(data.x[static_cast<std::size_t>(i) * data.dim + j]) << ',';
      }
      out << format_double(data.y[static_cast<std::size_t>(i)]) << ',' << split << '\n';
    }
    file.commit();
  }

  AtomicFile true_params_file(options.out_dir / "true_params.csv");
  auto& tp = true_params_file.stream();
  tp << "t";
  for (int j = 0; j < options.task.dim; ++j) tp << ",theta" << (j + 1);
  tp << "\n";
  for (int t = 1; t <= options.task.t_count; ++t) {
    tp << t;
    for (double v : true_params(options.task, t)) tp << ',' << format_double(v);
    tp << "\n";
  }
  true_params_file.commit();

  json task_doc{
      {"dim", options.task.dim},
      {"t_count", options.task.t_count},
      {"noise_sigma", options.task.noise_sigma},
      {"n_train", options.task.n_train},
      {"n_val", options.task.n_val},
      {"n_test", options.task.n_test},
      {"seed", options.task.seed},
      {"coeffs",
       {{"a", options.task.a}, {"b", options.task.b}, {"c", options.task.c},
        {"d", options.task.d}}},
      {"learner", options.learner.kind == LearnerKind::ols ? "ols" : "mlp"},
  };
  AtomicFile task_file(options.out_dir / "task.json");
  task_file.stream() << task_doc.dump(2) << "\n";
  task_file.commit();
}

void run_figures(const std::filesystem::path& results_dir) {
  const auto results =
      read_csv(results_dir / "results.csv", "method,seed,t,j,value,oracle");

  // Per (method, k): first average over anchors within each seed, then mean
  // and sample standard deviation across seeds.
  std::map<std::pair<std::string, std::int64_t>,
           std::map<std::string, std::pair<double, std::int64_t>>>
      groups;
  for (const auto& row : results) {
    const std::int64_t k = std::stoll(row[3]) - std::stoll(row[2]);
    auto& per_seed = groups[{row[0], k}][row[1]];
    per_seed.first += std::stod(row[4]);
    per_seed.second += 1;
  }
  AtomicFile fwt(results_dir / "fig_fwt_vs_delta.csv");
  fwt.stream() << "method,k,mean,std,n_seeds\n";
  for (const auto& [key, seeds] : groups) {
    std::vector<double> means;
    means.reserve(seeds.size());
    for (const auto& [seed, acc] : seeds) {
      means.push_back(acc.first / static_cast<double>(acc.second));
    }
    double mean = 0.0;
    for (double m : means) mean += m;
    mean /= static_cast<double>(means.size());
    double var = 0.0;
    for (double m : means) var += (m - mean) * (m - mean);
    const double sd =
        means.size() > 1 ? std::sqrt(var / static_cast<double>(means.size() - 1)) : 0.0;
    fwt.stream() << key.first << ',' << key.second << ',' << format_double(mean)
                 << ',' << format_double(sd) << ',' << means.size() << '\n';
  }
  fwt.commit();

  const auto norms = read_csv(results_dir / "norms.csv", "seed,t,l2_norm");
  AtomicFile fig_norms(results_dir / "fig_norms.csv");
  fig_norms.stream() << "seed,t,l2_norm\n";
  for (const auto& row : norms) {
    fig_norms.stream() << row[0] << ',' << row[1] << ',' << row[2] << '\n';
  }
  fig_norms.commit();

  const auto pca = read_csv(results_dir / "pca.csv", "seed,t,pc1,pc2");
  AtomicFile fig_pca(results_dir / "fig_pca.csv");
  fig_pca.stream() << "seed,t,pc1,pc2\n";
  for (const auto& row : pca) {
    fig_pca.stream() << row[0] << ',' << row[1] << ',' << row[2] << ',' << row[3]
                     << '\n';
  }
  fig_pca.commit();

  AtomicFile mse_log(results_dir / "fig_mse_log.csv");
  mse_log.stream() << "method,seed,t,j,value,log10_value\n";
  for (const auto& row : results) {
    mse_log.stream() << row[0] << ',' << row[1] << ',' << row[2] << ',' << row[3]
                     << ',' << row[4] << ','
                     << format_double(std::log10(std::stod(row[4]))) << '\n';
  }
  mse_log.commit();
}

}  // namespace tg
