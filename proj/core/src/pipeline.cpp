#include "ptycho/pipeline.hpp"

#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "ptycho/errors.hpp"
#include "ptycho/image_io.hpp"
#include "ptycho/metrics.hpp"
#include "ptycho/recon.hpp"
#include "ptycho/rng.hpp"
#include "ptycho/stack_io.hpp"

namespace ptycho {

namespace {

using nlohmann::json;

constexpr double kCoverageThreshold = 0.1;

ReconInit init_from_config(const RunConfig& cfg, const ScanGeometry& g) {
  ReconInit init;
  if (cfg.random_init) {
    init.object = random_object(g.object_rows, g.object_cols, cfg.init_seed);
  } else {
    init.object = ComplexField::ones(g.object_rows, g.object_cols);
  }
  init.probe = make_circular_probe(g.probe_rows, cfg.simulation.probe_radius);
  return init;
}

std::string z_store_checksum(const std::vector<ComplexField>& z_store) {
  std::vector<double> flat;
  for (const ComplexField& z : z_store) {
    for (std::size_t i = 0; i < z.size(); ++i) {
      flat.push_back(z[i].real());
      flat.push_back(z[i].imag());
    }
  }
  return fnv1a_hex(flat.data(), flat.size() * sizeof(double));
}

json params_to_json(const AlgoParams& p) {
  json j;
  j["name"] = algorithm_name(p.algorithm);
  j["sigma"] = p.sigma;
  j["tau"] = p.tau;
  j["beta_obj"] = p.beta_obj;
  j["beta_probe_start"] = p.beta_probe_start;
  j["beta_probe_end"] = p.beta_probe_end;
  j["epochs"] = p.epochs;
  j["shuffle_seed"] = p.shuffle_seed;
  return j;
}

void write_json(const json& j, const std::filesystem::path& path) {
  atomic_write_text(path, j.dump(2) + "\n");
}

struct SimResult {
  SimScene scene;
  DiffractionStack stack;
};

SimResult simulate_to_disk(const RunConfig& cfg) {
  SimResult result;
  result.scene = scene_from_config(cfg.simulation);
  result.stack = forward_diffract(result.scene.object, result.scene.probe,
                                  result.scene.geometry);
  if (cfg.simulation.flux) {
    // Flux is the dose incident on the aperture per position, so absorbing
    // frames collect proportionally fewer photons than transparent ones.
    result.stack =
        add_poisson_noise_dose(result.stack, *cfg.simulation.flux,
                               probe_energy(result.scene.probe),
                               cfg.simulation.noise_seed);
  }
  if (cfg.sparsity.keep_fraction < 1.0) {
    result.stack =
        sample_subset(result.stack, cfg.sparsity.keep_fraction, cfg.sparsity.seed);
  }

  const std::filesystem::path out = cfg.output_dir;
  std::filesystem::create_directories(out);
  save_stack(result.stack, out / "stack");
  export_field_images(result.scene.object, out / "truth_object");
  export_field_images(result.scene.probe, out / "truth_probe");

  json meta;
  meta["experiment"] = cfg.experiment;
  meta["probe_radius"] = cfg.simulation.probe_radius;
  meta["step"] = cfg.simulation.step;
  meta["phase_scale"] = cfg.simulation.phase_scale;
  meta["image_region"] = {result.scene.image_region.row_offset,
                          result.scene.image_region.col_offset,
                          result.scene.image_region.height,
                          result.scene.image_region.width};
  meta["overlap_fraction"] =
      overlap_fraction(cfg.simulation.probe_radius, double(cfg.simulation.step));
  meta["flux"] = cfg.simulation.flux ? json(*cfg.simulation.flux) : json(nullptr);
  meta["flux_reference_energy"] =
      cfg.simulation.flux ? json(probe_energy(result.scene.probe)) : json(nullptr);
  meta["noise_seed"] = cfg.simulation.noise_seed;
  meta["keep_fraction"] = cfg.sparsity.keep_fraction;
  meta["subset_seed"] = cfg.sparsity.seed;
  if (!cfg.simulation.builtin.empty()) {
    meta["builtin"] = cfg.simulation.builtin;
  } else {
    meta["amp_image"] = cfg.simulation.amp_image.string();
    meta["phase_image"] = cfg.simulation.phase_image.string();
  }
  write_json(meta, out / "experiment.json");
  return result;
}

struct ReconArtifacts {
  ReconState state;
  std::filesystem::path dir;
};

ReconArtifacts reconstruct_to_disk(const RunConfig& cfg,
                                   const DiffractionStack& stack) {
  ReconState state =
      run_reconstruction(stack, cfg.algorithm, init_from_config(cfg, stack.geometry));

  const std::string name = algorithm_name(cfg.algorithm.algorithm);
  const std::filesystem::path dir = cfg.output_dir / ("recon_" + name);
  std::filesystem::create_directories(dir);
  export_field_images(state.object, dir / "object");
  export_field_images(state.probe, dir / "probe");
  write_trace_csv(state.trace, dir / "trace.csv");

  json meta;
  meta["algorithm"] = params_to_json(cfg.algorithm);
  meta["init"] = cfg.random_init ? "random" : "ones";
  meta["init_seed"] = cfg.init_seed;
  meta["epochs_run"] = state.epochs_run;
  meta["final_r_factor"] =
      state.trace.points.empty() ? json(nullptr)
                                 : json(state.trace.points.back().r_factor);
  meta["z_store_checksum"] = state.z_store.empty()
                                 ? json(nullptr)
                                 : json(z_store_checksum(state.z_store));
  write_json(meta, dir / "recon.json");
  return ReconArtifacts{std::move(state), dir};
}

struct TruthFields {
  ComplexField object;
  ComplexField probe;
};

std::optional<TruthFields> load_truth(const RunConfig& cfg,
                                      const ScanGeometry& g) {
  const std::filesystem::path out = cfg.output_dir;
  if (!std::filesystem::exists(out / "truth_object_field.bin")) {
    return std::nullopt;
  }
  TruthFields truth;
  truth.object =
      read_field_bin(out / "truth_object_field.bin", g.object_rows, g.object_cols);
  truth.probe =
      read_field_bin(out / "truth_probe_field.bin", g.probe_rows, g.probe_cols);
  return truth;
}

ScoreReport score_fields(const RunConfig& cfg, const DiffractionStack& stack,
                         ComplexField object, ComplexField probe,
                         const std::optional<TruthFields>& truth) {
  const ScanGeometry& g = stack.geometry;
  ComplexField ideal = make_circular_probe(g.probe_rows, cfg.simulation.probe_radius);
  normalize_probe_energy(object, probe, probe_energy(ideal));

  ScoreReport report;
  report.algorithm = algorithm_name(cfg.algorithm.algorithm);
  report.r_factor = r_factor(object, probe, stack);
  report.overlap =
      overlap_fraction(cfg.simulation.probe_radius, double(cfg.simulation.step));
  report.positions = g.num_positions();
  if (truth) {
    report.r_noise = r_noise(truth->object, truth->probe, stack);
    Mask mask = coverage_mask(ideal, g, kCoverageThreshold);
    AlignedError aligned = aligned_object_error(object, truth->object, mask);
    report.aligned_error = aligned.error;
    report.aligned_phase = aligned.phase;
  }
  return report;
}

json report_to_json(const ScoreReport& r) {
  json j;
  j["algorithm"] = r.algorithm;
  j["r_factor"] = r.r_factor;
  j["r_noise"] = r.r_noise ? json(*r.r_noise) : json(nullptr);
  j["aligned_error"] = r.aligned_error ? json(*r.aligned_error) : json(nullptr);
  j["aligned_phase"] = r.aligned_phase ? json(*r.aligned_phase) : json(nullptr);
  j["overlap_fraction"] = r.overlap;
  j["positions"] = r.positions;
  return j;
}

// 2 x 3 montage (amp row over phase row) with thin separators.
void write_compare_grid(const std::vector<ComplexField>& objects,
                        const std::filesystem::path& path) {
  if (objects.empty()) return;
  const int rows = objects.front().rows();
  const int cols = objects.front().cols();
  const int gap = 4;
  const int panes = int(objects.size());
  GrayImage grid;
  grid.rows = 2 * rows + 3 * gap;
  grid.cols = panes * cols + (panes + 1) * gap;
  grid.pixels.assign(std::size_t(grid.rows) * grid.cols, 32);

  auto blit = [&](const GrayImage& pane, int r0, int c0) {
    for (int r = 0; r < pane.rows; ++r) {
      for (int c = 0; c < pane.cols; ++c) {
        grid.pixels[std::size_t(r0 + r) * grid.cols + (c0 + c)] =
            pane.pixels[std::size_t(r) * pane.cols + c];
      }
    }
  };
  for (int i = 0; i < panes; ++i) {
    int c0 = gap + i * (cols + gap);
    blit(render_amplitude(objects[std::size_t(i)]), gap, c0);
    blit(render_phase(objects[std::size_t(i)]), 2 * gap + rows, c0);
  }
  write_gray_png(grid, path);
}

}  // namespace

SimScene scene_from_config(const SimulationConfig& sim) {
  RealGrid amp;
  RealGrid phase;
  if (!sim.builtin.empty()) {
    amp = blobs_amplitude(sim.image_rows, sim.image_cols);
    phase = blobs_phase(sim.image_rows, sim.image_cols);
  } else {
    amp = read_unit_image(sim.amp_image);
    phase = read_unit_image(sim.phase_image);
  }
  return make_scene(amp, phase, sim.phase_scale, sim.probe_size,
                    sim.probe_radius, sim.step);
}

void cmd_simulate(const RunConfig& config) { simulate_to_disk(config); }

void cmd_reconstruct(const RunConfig& config) {
  DiffractionStack stack = load_stack(config.output_dir / "stack");
  reconstruct_to_disk(config, stack);
}

ScoreReport cmd_score(const RunConfig& config) {
  DiffractionStack stack = load_stack(config.output_dir / "stack");
  const ScanGeometry& g = stack.geometry;
  const std::string name = algorithm_name(config.algorithm.algorithm);
  const std::filesystem::path dir = config.output_dir / ("recon_" + name);
  ComplexField object =
      read_field_bin(dir / "object_field.bin", g.object_rows, g.object_cols);
  ComplexField probe =
      read_field_bin(dir / "probe_field.bin", g.probe_rows, g.probe_cols);

  ScoreReport report = score_fields(config, stack, std::move(object),
                                    std::move(probe), load_truth(config, g));
  write_json(report_to_json(report),
             config.output_dir / ("score_" + name + ".json"));
  return report;
}

std::vector<ScoreReport> cmd_compare(const RunConfig& config) {
  SimResult sim = simulate_to_disk(config);
  TruthFields truth{sim.scene.object, sim.scene.probe};

  std::vector<ScoreReport> reports;
  std::vector<ComplexField> objects;
  json results = json::object();
  for (Algorithm algo : {Algorithm::epie, Algorithm::rpie, Algorithm::sirdr}) {
    RunConfig run = config;
    run.algorithm.algorithm = algo;
    run.algorithm.validate();
    ReconArtifacts artifacts = reconstruct_to_disk(run, sim.stack);
    ScoreReport report =
        score_fields(run, sim.stack, artifacts.state.object,
                     artifacts.state.probe, std::optional<TruthFields>(truth));
    write_json(report_to_json(report),
               config.output_dir /
                   ("score_" + algorithm_name(algo) + ".json"));
    results[algorithm_name(algo)] = report_to_json(report);
    objects.push_back(std::move(artifacts.state.object));
    reports.push_back(std::move(report));
  }

  json summary;
  summary["experiment"] = config.experiment;
  summary["overlap_fraction"] = overlap_fraction(
      config.simulation.probe_radius, double(config.simulation.step));
  summary["positions"] = sim.stack.geometry.num_positions();
  summary["flux"] =
      config.simulation.flux ? json(*config.simulation.flux) : json(nullptr);
  summary["r_noise"] =
      config.simulation.flux
          ? json(r_noise(truth.object, truth.probe, sim.stack))
          : json(nullptr);
  summary["results"] = std::move(results);
  write_json(summary, config.output_dir / "compare_report.json");
  write_compare_grid(objects, config.output_dir / "compare_grid.png");
  return reports;
}

}  // namespace ptycho
