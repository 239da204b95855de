#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ptycho/config.hpp"
#include "ptycho/sim.hpp"

namespace ptycho {

// Builds the synthetic scene a config describes (source images, padded
// object, probe, raster geometry).
SimScene scene_from_config(const SimulationConfig& sim);

// Simulates per config and writes <out>/stack/, truth field exports and
// experiment.json.
void cmd_simulate(const RunConfig& config);

// Reconstructs <out>/stack with the configured algorithm; writes
// <out>/recon_<algo>/ (field exports, trace.csv, recon.json).
void cmd_reconstruct(const RunConfig& config);

struct ScoreReport {
  std::string algorithm;
  double r_factor = 0.0;
  std::optional<double> r_noise;        // needs truth exports
  std::optional<double> aligned_error;  // masked, gauge-fixed
  std::optional<double> aligned_phase;
  double overlap = 0.0;
  int positions = 0;
};

// Scores <out>/recon_<algo>/ against the stack (and truth when available);
// writes <out>/score_<algo>.json.
ScoreReport cmd_score(const RunConfig& config);

// Simulates once, then runs and scores all three algorithms from a shared
// init; writes everything cmd_simulate/cmd_reconstruct/cmd_score would plus
// compare_report.json and a compare_grid.png montage.
std::vector<ScoreReport> cmd_compare(const RunConfig& config);

}  // namespace ptycho
