// ptysolve: simulate / reconstruct / score / compare for synthetic
// ptychography runs driven by a JSON config.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ptycho/config.hpp"
#include "ptycho/errors.hpp"
#include "ptycho/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitDiverged = 3;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::int64_t seed = -1;
  std::string algorithm;
  int epochs = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_algorithm,
                bool with_epochs) {
  cmd->add_option("--config", args.config_path, "JSON run config")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
  cmd->add_option("--seed", args.seed,
                  "master seed; derives noise/shuffle/subset/init seeds")
      ->check(CLI::NonNegativeNumber);
  if (with_algorithm) {
    cmd->add_option("--algorithm", args.algorithm, "epie | rpie | sirdr");
  }
  if (with_epochs) {
    cmd->add_option("--epochs", args.epochs, "epoch count (overrides config)")
        ->check(CLI::PositiveNumber);
  }
}

ptycho::RunConfig resolve_config(const CommonArgs& args) {
  ptycho::RunConfig config = ptycho::load_run_config(args.config_path);
  ptycho::CliOverrides overrides;
  if (!args.out_dir.empty()) overrides.output_dir = args.out_dir;
  if (args.seed >= 0) overrides.master_seed = std::uint64_t(args.seed);
  if (!args.algorithm.empty()) {
    overrides.algorithm = ptycho::algorithm_from_name(args.algorithm);
  }
  if (args.epochs > 0) overrides.epochs = args.epochs;
  ptycho::apply_overrides(config, overrides);
  return config;
}

void print_report(const ptycho::ScoreReport& r) {
  std::printf("%s: r_factor=%.6g", r.algorithm.c_str(), r.r_factor);
  if (r.r_noise) std::printf(" r_noise=%.6g", *r.r_noise);
  if (r.aligned_error) std::printf(" aligned_error=%.6g", *r.aligned_error);
  std::printf("\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic ptychography phase retrieval"};
  app.require_subcommand(1);

  CommonArgs sim_args;
  CLI::App* sim = app.add_subcommand("simulate", "generate a diffraction stack");
  add_common(sim, sim_args, false, false);

  CommonArgs rec_args;
  CLI::App* rec = app.add_subcommand("reconstruct", "run phase retrieval");
  add_common(rec, rec_args, true, true);

  CommonArgs score_args;
  CLI::App* score = app.add_subcommand("score", "evaluate a reconstruction");
  add_common(score, score_args, true, false);

  CommonArgs cmp_args;
  CLI::App* cmp = app.add_subcommand("compare", "simulate + all algorithms");
  add_common(cmp, cmp_args, false, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      ptycho::cmd_simulate(resolve_config(sim_args));
    } else if (rec->parsed()) {
      ptycho::cmd_reconstruct(resolve_config(rec_args));
    } else if (score->parsed()) {
      print_report(ptycho::cmd_score(resolve_config(score_args)));
    } else if (cmp->parsed()) {
      for (const auto& report : ptycho::cmd_compare(resolve_config(cmp_args))) {
        print_report(report);
      }
    }
  } catch (const ptycho::divergence_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitOk;
}
