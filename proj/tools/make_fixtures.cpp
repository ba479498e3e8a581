// Regenerates the committed fixtures/ tree. The files are frozen golden data
// for format and stream compatibility tests (including reimplementations in
// other languages); regeneration must be byte-identical, which the unit suite
// verifies.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "tg/checkpoint.hpp"
#include "tg/evaluation.hpp"
#include "tg/rng.hpp"
#include "tg/runner.hpp"

using namespace tg;

namespace {

Checkpoint golden_checkpoint(Dtype dtype) {
  GaussianStream g(dtype == Dtype::f32 ? 32 : 64);
  Tensor w1{"w1", {2, 3}, std::vector<double>(6)};
  Tensor b1{"b1", {2}, std::vector<double>(2)};
  Tensor scale{"scale", {}, std::vector<double>(1)};
  for (auto* t : {&w1, &b1, &scale}) {
    for (auto& v : t->values) v = g.next();
  }
  return Checkpoint({w1, b1, scale}, 0, dtype);
}

void write_rng_reference(const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) {
    std::perror("fopen");
    std::exit(1);
  }
  std::fprintf(f, "seed,index,u64_hex,gaussian\n");
  for (std::uint64_t seed : {1ull, 7ull, 42ull}) {
    SplitMix64 ints(seed);
    GaussianStream gauss(seed);
    for (int i = 0; i < 8; ++i) {
      std::fprintf(f, "%" PRIu64 ",%d,%016" PRIx64 ",%s\n", seed, i, ints.next(),
                   format_double(gauss.next()).c_str());
    }
  }
  std::fclose(f);
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path root = argc > 1 ? argv[1] : "fixtures";
  std::filesystem::create_directories(root);

  save(golden_checkpoint(Dtype::f64), root / "golden_f64.tgck");
  save(golden_checkpoint(Dtype::f32), root / "golden_f32.tgck");
  write_rng_reference(root / "rng_reference.csv");

  SynthOptions synth;
  synth.task = SyntheticTask::with_default_coeffs(2, 42);
  synth.task.noise_sigma = 0.1;
  synth.task.n_train = 4;
  synth.task.n_val = 3;
  synth.task.n_test = 3;
  synth.task.t_count = 5;
  synth.learner.kind = LearnerKind::ols;
  synth.out_dir = root / "synthetic_small";
  run_synth(synth);

  std::printf("fixtures written to %s\n", root.string().c_str());
  return 0;
}
