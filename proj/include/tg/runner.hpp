#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "tg/methods.hpp"
#include "tg/synthetic.hpp"
#include "tg/tuning.hpp"

namespace tg {

struct ManifestMethod {
  MethodSpec spec;
  std::optional<SearchSpace> tuning;
};

/// Experiment description, read from a strict JSON manifest (unknown fields
/// are rejected; see docs/README for the schema). The task is either a
/// synthetic generator plus learner, or an existing trajectory manifest
/// (analytics only, since stored checkpoints carry no evaluation data).
struct ExperimentManifest {
  std::optional<SyntheticTask> task;
  Learner learner{};
  TrainConfig train{};
  std::optional<std::filesystem::path> trajectory_manifest;
  std::vector<ManifestMethod> methods;
  int delta = 1;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output_dir;

  static ExperimentManifest parse_file(const std::filesystem::path& path);
};

struct RunOptions {
  bool oracle_future = false;  // tune on the next timestamp's validation split
  int threads = 1;             // parallelism across seeds
};

/// Runs every (seed, method, anchor time) cell and writes results.csv,
/// summary.csv, alphas.csv, norms.csv, and pca.csv into the manifest's
/// output directory. Outputs are byte-deterministic for a fixed manifest.
/// On failure a FAILED marker file is left next to any partial outputs.
void run_experiment(const ExperimentManifest& manifest, const RunOptions& options);

struct SynthOptions {
  SyntheticTask task{};
  Learner learner{};
  TrainConfig train{};
  std::filesystem::path out_dir;
};

/// Materializes a trajectory (TGCK files + trajectory.json), per-timestamp
/// dataset CSVs, true_params.csv, and task.json under out_dir.
void run_synth(const SynthOptions& options);

/// Aggregates a run directory into tidy per-figure CSVs
/// (fig_fwt_vs_delta.csv, fig_norms.csv, fig_pca.csv, fig_mse_log.csv).
void run_figures(const std::filesystem::path& results_dir);

}  // namespace tg
