// tg command-line driver. Talks to the core exclusively through the C API in
// tg.h so it doubles as a smoke test of the shared-library surface.
//
// Exit codes: 0 success, 2 bad flags or malformed manifest/missing inputs,
// 3 runtime failure (partial outputs are preserved next to a FAILED marker).

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tg.h"

namespace {

// Each subcommand treats a different status as "bad input" (exit 2); any
// other failure is a runtime error (exit 3).
int report(tg_status status, tg_status bad_input) {
  if (status == TG_OK) return 0;
  std::fprintf(stderr, "tg: %s\n", tg_last_error());
  return status == bad_input || status == TG_ERR_INVALID_ARGUMENT ? 2 : 3;
}

int threads_from_env() {
  const char* raw = std::getenv("TG_THREADS");
  if (!raw) return 1;
  const int value = std::atoi(raw);
  return value >= 1 ? value : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tg: estimate future model parameters from checkpoint history"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tg_version()));

  std::string manifest_path;
  bool oracle_future = false;
  auto* run = app.add_subcommand(
      "run", "Run the experiment described by a JSON manifest");
  run->add_option("manifest", manifest_path, "Path to the experiment manifest")
      ->required();
  run->add_flag("--oracle-future", oracle_future,
                "Diagnostic only: tune on the NEXT timestamp's validation split. "
                "This peeks at future data and is excluded from the honest "
                "protocol; outputs are flagged with oracle=true.");

  tg_synth_options synth_opts;
  tg_synth_options_default(&synth_opts);
  std::string synth_out = "synth_out";
  std::string learner = "ols";
  std::string loss = "mse";
  std::string init = "from_previous";
  std::vector<double> ca, cb, cc, cd;
  auto* synth = app.add_subcommand(
      "synth", "Materialize a synthetic task: trajectory, datasets, manifest");
  synth->add_option("--out", synth_out, "Output directory")->capture_default_str();
  synth->add_option("--dim", synth_opts.dim, "Input dimension")->capture_default_str();
  synth->add_option("--t-count", synth_opts.t_count, "Number of timestamps")
      ->capture_default_str();
  synth->add_option("--sigma", synth_opts.noise_sigma, "Target noise sigma")
      ->capture_default_str();
  synth->add_option("--n-train", synth_opts.n_train, "Training samples per timestamp")
      ->capture_default_str();
  synth->add_option("--n-val", synth_opts.n_val, "Validation samples per timestamp")
      ->capture_default_str();
  synth->add_option("--n-test", synth_opts.n_test, "Test samples per timestamp")
      ->capture_default_str();
  synth->add_option("--seed", synth_opts.seed, "Master seed")->capture_default_str();
  synth->add_option("--coeff-a", ca, "Cubic constant terms (length dim)");
  synth->add_option("--coeff-b", cb, "Cubic linear terms (length dim)");
  synth->add_option("--coeff-c", cc, "Cubic quadratic terms (length dim)");
  synth->add_option("--coeff-d", cd, "Cubic cubic terms (length dim)");
  synth->add_option("--learner", learner, "Learner: ols or mlp")
      ->check(CLI::IsMember({"ols", "mlp"}))
      ->capture_default_str();
  synth->add_option("--hidden", synth_opts.hidden, "MLP hidden width")
      ->capture_default_str();
  synth->add_option("--init-scale", synth_opts.init_scale, "MLP init scale")
      ->capture_default_str();
  synth->add_option("--loss", loss, "Training loss: mse or cross_entropy")
      ->check(CLI::IsMember({"mse", "cross_entropy"}))
      ->capture_default_str();
  synth->add_option("--lr", synth_opts.lr, "MLP learning rate")->capture_default_str();
  synth->add_option("--iters", synth_opts.iters, "MLP iterations per timestamp")
      ->capture_default_str();
  synth->add_option("--batch", synth_opts.batch, "MLP batch size")
      ->capture_default_str();
  synth->add_option("--init", init, "MLP warm start: from_previous or from_base")
      ->check(CLI::IsMember({"from_previous", "from_base"}))
      ->capture_default_str();

  std::string figures_dir;
  auto* figures = app.add_subcommand(
      "figures", "Aggregate a run directory into tidy per-figure CSVs");
  figures->add_option("dir", figures_dir, "Directory holding results.csv")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (run->parsed()) {
    return report(tg_run_experiment(manifest_path.c_str(), oracle_future ? 1 : 0,
                                    threads_from_env()),
                  TG_ERR_MANIFEST);
  }

  if (synth->parsed()) {
    const auto dim = static_cast<std::size_t>(synth_opts.dim);
    for (const auto* coeffs : {&ca, &cb, &cc, &cd}) {
      if (!coeffs->empty() && coeffs->size() != dim) {
        std::fprintf(stderr, "tg: coefficient lists must have length --dim\n");
        return 2;
      }
    }
    synth_opts.coeff_a = ca.empty() ? nullptr : ca.data();
    synth_opts.coeff_b = cb.empty() ? nullptr : cb.data();
    synth_opts.coeff_c = cc.empty() ? nullptr : cc.data();
    synth_opts.coeff_d = cd.empty() ? nullptr : cd.data();
    synth_opts.learner_mlp = learner == "mlp" ? 1 : 0;
    synth_opts.loss_cross_entropy = loss == "cross_entropy" ? 1 : 0;
    synth_opts.init_from_base = init == "from_base" ? 1 : 0;
    return report(tg_synth(&synth_opts, synth_out.c_str()), TG_ERR_INVALID_ARGUMENT);
  }

  return report(tg_figures(figures_dir.c_str()), TG_ERR_IO);
}
