#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "tg/evaluation.hpp"
#include "tg/runner.hpp"

using namespace tg;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "tg_runner_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_manifest(const fs::path& dir, const std::string& body) {
  const auto path = dir / "manifest.json";
  std::ofstream f(path, std::ios::binary);
  f << body;
  return path;
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f);
  return std::string((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t begin = 0;
  while (true) {
    const auto comma = line.find(',', begin);
    fields.push_back(line.substr(begin, comma - begin));
    if (comma == std::string::npos) break;
    begin = comma + 1;
  }
  return fields;
}

const char* kMinimalManifest = R"({
  "task": {
    "synthetic": {"dim": 2, "t_count": 8, "noise_sigma": 0.05,
                  "n_train": 64, "n_val": 32, "n_test": 32},
    "learner": {"kind": "ols"}
  },
  "methods": [{"id": "recent"}],
  "delta": 1,
  "seeds": [3],
  "output_dir": "out"
})";

}  // namespace

TEST_CASE("minimal manifest: recent with delta 1 yields T-1 result rows") {
  const auto dir = fresh_dir("minimal");
  const auto manifest_path = write_manifest(dir, kMinimalManifest);
  const auto manifest = ExperimentManifest::parse_file(manifest_path);
  run_experiment(manifest, {});

  const auto rows = lines_of(read_file(dir / "out" / "results.csv"));
  CHECK(rows.size() == 1 + 7);  // header + (t_count - 1)
  CHECK(rows[0] == "method,seed,t,j,value,oracle");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto fields = split(rows[i]);
    REQUIRE(fields.size() == 6);
    CHECK(fields[0] == "recent");
    CHECK(fields[1] == "3");
    CHECK(fields[5] == "false");
    CHECK(std::stoll(fields[3]) == std::stoll(fields[2]) + 1);
  }
  CHECK(fs::exists(dir / "out" / "summary.csv"));
  CHECK(fs::exists(dir / "out" / "alphas.csv"));
  CHECK(fs::exists(dir / "out" / "norms.csv"));
  CHECK(fs::exists(dir / "out" / "pca.csv"));
  CHECK_FALSE(fs::exists(dir / "out" / "FAILED"));
}

TEST_CASE("manifest schema errors name the offending field") {
  const auto dir = fresh_dir("schema");

  // Missing delta.
  const auto missing = write_manifest(dir, R"({
    "task": {"synthetic": {"dim": 2, "t_count": 4}, "learner": {"kind": "ols"}},
    "methods": [{"id": "recent"}],
    "seeds": [1],
    "output_dir": "out"
  })");
  bool threw = false;
  try {
    ExperimentManifest::parse_file(missing);
  } catch (const Error& e) {
    threw = true;
    CHECK(e.code() == Errc::manifest_error);
    CHECK(std::string(e.what()).find("delta") != std::string::npos);
  }
  CHECK(threw);

  // Unknown fields are rejected.
  const auto unknown = write_manifest(dir, R"({
    "task": {"synthetic": {"dim": 2, "t_count": 4}, "learner": {"kind": "ols"}},
    "methods": [{"id": "recent"}],
    "delta": 1,
    "seeds": [1],
    "output_dir": "out",
    "extra_knob": true
  })");
  threw = false;
  try {
    ExperimentManifest::parse_file(unknown);
  } catch (const Error& e) {
    threw = true;
    CHECK(std::string(e.what()).find("extra_knob") != std::string::npos);
  }
  CHECK(threw);

  // Unknown method id.
  const auto bad_method = write_manifest(dir, R"({
    "task": {"synthetic": {"dim": 2, "t_count": 4}, "learner": {"kind": "ols"}},
    "methods": [{"id": "linear_probe"}],
    "delta": 1,
    "seeds": [1],
    "output_dir": "out"
  })");
  CHECK_THROWS_AS(ExperimentManifest::parse_file(bad_method), Error);
}

TEST_CASE("repeated runs are byte-identical") {
  const auto dir = fresh_dir("determinism");
  const auto manifest_path = write_manifest(dir, R"({
    "task": {
      "synthetic": {"dim": 2, "t_count": 6, "noise_sigma": 0.1,
                    "n_train": 48, "n_val": 24, "n_test": 24},
      "learner": {"kind": "ols"}
    },
    "methods": [
      {"id": "recent"},
      {"id": "average"},
      {"id": "taylor", "alpha": 0.5},
      {"id": "downscale", "tuning": {"kind": "grid", "lo": 0.9, "hi": 1.0, "count": 11}},
      {"id": "ema", "tuning": {"kind": "grid", "lo": 0.5, "hi": 0.99, "count": 8}},
      {"id": "learned_offset", "lambda": 0.1, "max_iters": 300}
    ],
    "delta": 3,
    "seeds": [1, 2],
    "output_dir": "out"
  })");
  const auto manifest = ExperimentManifest::parse_file(manifest_path);
  run_experiment(manifest, {});
  std::map<std::string, std::string> first;
  for (const char* name : {"results.csv", "summary.csv", "alphas.csv",
                           "norms.csv", "pca.csv"}) {
    first[name] = read_file(dir / "out" / name);
  }
  run_experiment(manifest, {});
  for (const auto& [name, body] : first) {
    CHECK(read_file(dir / "out" / name) == body);
  }
  // Parallel execution produces the same bytes.
  RunOptions parallel;
  parallel.threads = 2;
  run_experiment(manifest, parallel);
  for (const auto& [name, body] : first) {
    CHECK(read_file(dir / "out" / name) == body);
  }
}

TEST_CASE("recent rows equal direct evaluation of the stored checkpoint") {
  const auto dir = fresh_dir("recent_check");
  const auto manifest_path = write_manifest(dir, kMinimalManifest);
  const auto manifest = ExperimentManifest::parse_file(manifest_path);
  run_experiment(manifest, {});

  SyntheticTask task = *manifest.task;
  task.seed = 3;
  TrainConfig train = manifest.train;
  train.seed = 3;
  const auto traj = run_continual(task, manifest.learner, train);

  const auto rows = lines_of(read_file(dir / "out" / "results.csv"));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto fields = split(rows[i]);
    const auto t = std::stoll(fields[2]);
    const auto j = std::stoll(fields[3]);
    const double direct = evaluate_forecast(
        traj[static_cast<std::size_t>(t - 1)], generate(task, j).test(),
        ModelKind::linear);
    CHECK(std::stod(fields[4]) == doctest::Approx(direct).epsilon(1e-15));
  }
}

TEST_CASE("tuned alphas come from the configured search space") {
  const auto dir = fresh_dir("alphas");
  const auto manifest_path = write_manifest(dir, R"({
    "task": {
      "synthetic": {"dim": 2, "t_count": 6, "noise_sigma": 0.1,
                    "n_train": 64, "n_val": 32, "n_test": 32},
      "learner": {"kind": "ols"}
    },
    "methods": [
      {"id": "taylor", "tuning": {"kind": "random", "lo": -1.0, "hi": 1.0,
                                  "count": 30, "seed": 5}}
    ],
    "delta": 2,
    "seeds": [4],
    "output_dir": "out"
  })");
  const auto manifest = ExperimentManifest::parse_file(manifest_path);
  run_experiment(manifest, {});

  SearchSpace space{SearchSpace::Kind::random, -1.0, 1.0, 30, 5};
  const auto candidates = space.candidates();
  const auto rows = lines_of(read_file(dir / "out" / "alphas.csv"));
  CHECK(rows.size() > 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto fields = split(rows[i]);
    const double alpha = std::stod(fields[3]);
    CHECK(std::count(candidates.begin(), candidates.end(), alpha) == 1);
  }
}

TEST_CASE("stationary task: tuned downscale matches recent within 1e-6") {
  const auto dir = fresh_dir("stationary");
  const auto manifest_path = write_manifest(dir, R"({
    "task": {
      "synthetic": {"dim": 2, "t_count": 6, "noise_sigma": 0.02,
                    "n_train": 4000, "n_val": 8000, "n_test": 512,
                    "coeffs": {"a": [1.0, -0.5], "b": [0.0, 0.0],
                                "c": [0.0, 0.0], "d": [0.0, 0.0]}},
      "learner": {"kind": "ols"}
    },
    "methods": [
      {"id": "recent"},
      {"id": "downscale", "tuning": {"kind": "grid", "lo": 0.99, "hi": 1.0, "count": 51}}
    ],
    "delta": 2,
    "seeds": [11],
    "output_dir": "out"
  })");
  const auto manifest = ExperimentManifest::parse_file(manifest_path);
  run_experiment(manifest, {});

  const auto rows = lines_of(read_file(dir / "out" / "summary.csv"));
  REQUIRE(rows.size() == 3);
  std::map<std::string, double> avg;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto fields = split(rows[i]);
    avg[fields[0]] = std::stod(fields[2]);
  }
  CHECK(std::abs(avg.at("recent") - avg.at("downscale")) < 1e-6);
}

TEST_CASE("oracle-future tuning is flagged in every output row") {
  const auto dir = fresh_dir("oracle");
  const auto manifest_path = write_manifest(dir, R"({
    "task": {
      "synthetic": {"dim": 2, "t_count": 5, "noise_sigma": 0.1,
                    "n_train": 48, "n_val": 24, "n_test": 24},
      "learner": {"kind": "ols"}
    },
    "methods": [
      {"id": "taylor", "tuning": {"kind": "grid", "lo": -1.0, "hi": 1.0, "count": 9}}
    ],
    "delta": 1,
    "seeds": [6],
    "output_dir": "out"
  })");
  const auto manifest = ExperimentManifest::parse_file(manifest_path);
  RunOptions options;
  options.oracle_future = true;
  run_experiment(manifest, options);
  for (const char* name : {"results.csv", "summary.csv", "alphas.csv"}) {
    const auto rows = lines_of(read_file(dir / "out" / name));
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto fields = split(rows[i]);
      CHECK(fields.back() == "true");
    }
  }
}

TEST_CASE("synth output trees are deterministic and loadable") {
  const auto dir = fresh_dir("synth");
  SynthOptions options;
  options.task = SyntheticTask::with_default_coeffs(2, 9);
  options.task.t_count = 5;
  options.task.n_train = 16;
  options.task.n_val = 8;
  options.task.n_test = 8;
  options.out_dir = dir / "a";
  run_synth(options);
  options.out_dir = dir / "b";
  run_synth(options);

  REQUIRE(fs::exists(dir / "a" / "trajectory.json"));
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const auto name = entry.path().filename();
    CHECK(read_file(entry.path()) == read_file(dir / "b" / name));
  }

  const auto traj = load_trajectory(dir / "a" / "trajectory.json");
  CHECK(traj.size() == 5);
  // Noiseless OLS synth matches the true parameters.
  SynthOptions exact = options;
  exact.task.noise_sigma = 0.0;
  exact.task.n_train = 32;
  exact.out_dir = dir / "exact";
  run_synth(exact);
  const auto clean = load_trajectory(dir / "exact" / "trajectory.json");
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const auto truth = true_params(exact.task, clean[i].timestamp());
    const auto values = flatten(clean[i]).values;
    double dist = 0.0;
    for (std::size_t j = 0; j < truth.size(); ++j) {
      dist += (values[j] - truth[j]) * (values[j] - truth[j]);
    }
    CHECK(std::sqrt(dist) <= 1e-8);
  }
}

TEST_CASE("figures aggregate results into per-figure CSVs") {
  const auto dir = fresh_dir("figures");
  const auto manifest_path = write_manifest(dir, R"({
    "task": {
      "synthetic": {"dim": 2, "t_count": 8, "noise_sigma": 0.1,
                    "n_train": 48, "n_val": 24, "n_test": 24},
      "learner": {"kind": "ols"}
    },
    "methods": [{"id": "recent"}, {"id": "downscale", "alpha": 0.95}],
    "delta": 3,
    "seeds": [1, 2],
    "output_dir": "out"
  })");
  run_experiment(ExperimentManifest::parse_file(manifest_path), {});
  run_figures(dir / "out");

  const auto fwt = lines_of(read_file(dir / "out" / "fig_fwt_vs_delta.csv"));
  CHECK(fwt[0] == "method,k,mean,std,n_seeds");
  CHECK(fwt.size() == 1 + 2 * 3);  // 2 methods x delta 3

  const auto norms_in = read_file(dir / "out" / "norms.csv");
  const auto norms_out = read_file(dir / "out" / "fig_norms.csv");
  CHECK(norms_in == norms_out);  // pass-through

  const auto logs = lines_of(read_file(dir / "out" / "fig_mse_log.csv"));
  CHECK(logs[0] == "method,seed,t,j,value,log10_value");
  for (std::size_t i = 1; i < logs.size(); ++i) {
    const auto fields = split(logs[i]);
    const double value = std::stod(fields[4]);
    const double log_value = std::stod(fields[5]);
    CHECK(log_value == doctest::Approx(std::log10(value)).epsilon(1e-12));
  }

  CHECK_THROWS_AS(run_figures(dir / "nowhere"), Error);
}

TEST_CASE("external trajectory manifests run analytics only") {
  const auto dir = fresh_dir("external");
  SynthOptions synth;
  synth.task = SyntheticTask::with_default_coeffs(2, 13);
  synth.task.t_count = 6;
  synth.task.n_train = 16;
  synth.task.n_val = 4;
  synth.task.n_test = 4;
  synth.out_dir = dir / "traj";
  run_synth(synth);

  const auto manifest_path = write_manifest(dir, R"({
    "task": {"trajectory_manifest": "traj/trajectory.json"},
    "methods": [{"id": "recent"}],
    "delta": 1,
    "seeds": [1],
    "output_dir": "out"
  })");
  run_experiment(ExperimentManifest::parse_file(manifest_path), {});
  CHECK(fs::exists(dir / "out" / "norms.csv"));
  CHECK(fs::exists(dir / "out" / "pca.csv"));
  CHECK_FALSE(fs::exists(dir / "out" / "results.csv"));
}

TEST_CASE("runtime failures leave a FAILED marker") {
  const auto dir = fresh_dir("failure");
  const auto manifest_path = write_manifest(dir, R"({
    "task": {"trajectory_manifest": "missing/trajectory.json"},
    "methods": [{"id": "recent"}],
    "delta": 1,
    "seeds": [1],
    "output_dir": "out"
  })");
  const auto manifest = ExperimentManifest::parse_file(manifest_path);
  CHECK_THROWS_AS(run_experiment(manifest, {}), Error);
  CHECK(fs::exists(dir / "out" / "FAILED"));
}
