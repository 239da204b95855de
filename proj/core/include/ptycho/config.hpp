#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "ptycho/recon.hpp"

namespace ptycho {

struct SimulationConfig {
  std::string builtin = "blobs";  // empty when explicit images given
  std::filesystem::path amp_image;
  std::filesystem::path phase_image;
  int image_rows = 128;
  int image_cols = 128;
  double phase_scale = 1.0;
  int probe_size = 128;
  double probe_radius = 50.0;
  int step = 35;
  std::optional<double> flux;  // photons per position; absent = noise-free
  std::uint64_t noise_seed = 1;
};

struct SparsityConfig {
  double keep_fraction = 1.0;
  std::uint64_t seed = 1;
};

struct RunConfig {
  std::string experiment = "experiment";
  std::filesystem::path output_dir = "out";
  SimulationConfig simulation;
  AlgoParams algorithm;
  bool random_init = false;  // false: all-ones object start
  std::uint64_t init_seed = 1;
  SparsityConfig sparsity;
};

// Parses and validates a JSON config. Unknown keys and out-of-range values
// raise config_error naming the offending field (e.g. "algorithm.tau").
// Relative image paths resolve against the config file's directory.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& json_text,
                           const std::filesystem::path& base_dir);

// Command-line overrides. A master seed rewrites every per-purpose seed via
// mix_seed(master, k): noise k=1, shuffle k=2, subset k=3, init k=4.
struct CliOverrides {
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::uint64_t> master_seed;
  std::optional<Algorithm> algorithm;
  std::optional<int> epochs;
};

void apply_overrides(RunConfig& config, const CliOverrides& overrides);

}  // namespace ptycho
