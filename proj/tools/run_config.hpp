#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

namespace xmg::cli {

/// Everything a pipeline run can configure, loadable from a JSON file with
/// command-line flags layered on top. Unknown keys in the file are rejected
/// so typos cannot silently fall back to defaults.
struct RunConfig {
  // paths
  std::string corpus_dir;
  std::string output_dir;
  std::string checkpoint_dir;

  // codec
  int reference_velocity = 64;

  // model / training
  int layers = 2;  // fixed by the checkpoint format; validated, not varied
  int hidden = 150;
  int segment = 128;
  double learning_rate = 2e-3;
  int epochs = 50;

  // generation
  int length = 200;
  int count = 50;
  double temperature = 1.0;
  std::array<int, 5> seed_token = {0, 0, 0, 23, 0};

  // screening
  double lambda = 0.5;
  int window = 16;
  double kappa = 1.0;

  std::uint64_t seed = 42;

  void validate() const;
};

RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace xmg::cli
