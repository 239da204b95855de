#include "ptycho/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ptycho/errors.hpp"
#include "ptycho/rng.hpp"

namespace ptycho {

namespace {

using nlohmann::json;

// Field-path aware accessors so every failure names the offending key.
struct Block {
  const json& j;
  std::string path;

  void reject_unknown(std::initializer_list<const char*> allowed) const {
    for (auto it = j.begin(); it != j.end(); ++it) {
      bool known = false;
      for (const char* k : allowed) {
        if (it.key() == k) {
          known = true;
          break;
        }
      }
      if (!known) {
        throw config_error(path + ": unknown key '" + it.key() + "'");
      }
    }
  }

  bool has(const char* key) const {
    return j.contains(key) && !j.at(key).is_null();
  }

  template <typename T>
  T get(const char* key, T fallback) const {
    if (!has(key)) return fallback;
    try {
      return j.at(key).get<T>();
    } catch (const json::exception&) {
      throw config_error(path + "." + key + ": wrong type");
    }
  }

  template <typename T>
  T require(const char* key) const {
    if (!has(key)) throw config_error(path + "." + key + ": missing");
    return get<T>(key, T{});
  }

  Block child(const char* key) const {
    if (!has(key)) throw config_error(path + "." + key + ": missing");
    const json& c = j.at(key);
    if (!c.is_object()) throw config_error(path + "." + key + ": must be an object");
    return Block{c, path + "." + key};
  }

  std::optional<Block> optional_child(const char* key) const {
    if (!has(key)) return std::nullopt;
    const json& c = j.at(key);
    if (!c.is_object()) throw config_error(path + "." + key + ": must be an object");
    return Block{c, path + "." + key};
  }
};

void check_positive_int(int v, const std::string& path) {
  if (v <= 0) throw config_error(path + ": must be positive");
}

SimulationConfig parse_simulation(const Block& b,
                                  const std::filesystem::path& base_dir) {
  b.reject_unknown({"builtin", "amp_image", "phase_image", "image_rows",
                    "image_cols", "phase_scale", "probe_size", "probe_radius",
                    "step", "flux", "noise_seed"});
  SimulationConfig sim;
  bool has_images = b.has("amp_image") || b.has("phase_image");
  if (has_images) {
    if (!b.has("amp_image") || !b.has("phase_image")) {
      throw config_error(b.path + ": amp_image and phase_image go together");
    }
    if (b.has("builtin")) {
      throw config_error(b.path + ": builtin and explicit images are exclusive");
    }
    sim.builtin.clear();
    auto resolve = [&](const char* key) {
      std::filesystem::path p = b.require<std::string>(key);
      if (p.is_relative()) p = base_dir / p;
      if (!std::filesystem::exists(p)) {
        throw config_error(b.path + "." + key + ": file not found: " + p.string());
      }
      return p;
    };
    sim.amp_image = resolve("amp_image");
    sim.phase_image = resolve("phase_image");
  } else {
    sim.builtin = b.get<std::string>("builtin", "blobs");
    if (sim.builtin != "blobs") {
      throw config_error(b.path + ".builtin: unknown image set '" + sim.builtin + "'");
    }
  }
  sim.image_rows = b.get<int>("image_rows", 128);
  sim.image_cols = b.get<int>("image_cols", 128);
  check_positive_int(sim.image_rows, b.path + ".image_rows");
  check_positive_int(sim.image_cols, b.path + ".image_cols");
  sim.phase_scale = b.get<double>("phase_scale", 1.0);
  if (!std::isfinite(sim.phase_scale) || sim.phase_scale < 0.0) {
    throw config_error(b.path + ".phase_scale: must be >= 0");
  }
  sim.probe_size = b.get<int>("probe_size", 128);
  check_positive_int(sim.probe_size, b.path + ".probe_size");
  sim.probe_radius = b.get<double>("probe_radius", 50.0);
  if (!std::isfinite(sim.probe_radius) || sim.probe_radius <= 0.0) {
    throw config_error(b.path + ".probe_radius: must be positive");
  }
  sim.step = b.get<int>("step", 35);
  check_positive_int(sim.step, b.path + ".step");
  if (b.has("flux")) {
    double flux = b.require<double>("flux");
    if (!std::isfinite(flux) || flux <= 0.0) {
      throw config_error(b.path + ".flux: must be positive");
    }
    sim.flux = flux;
  }
  sim.noise_seed = b.get<std::uint64_t>("noise_seed", 1);
  return sim;
}

void parse_algorithm(const Block& b, RunConfig& cfg) {
  b.reject_unknown({"name", "sigma", "tau", "beta_obj", "beta_probe_start",
                    "beta_probe_end", "epochs", "shuffle_seed", "init",
                    "init_seed"});
  AlgoParams& p = cfg.algorithm;
  if (b.has("name")) {
    try {
      p.algorithm = algorithm_from_name(b.require<std::string>("name"));
    } catch (const parameter_error& e) {
      throw config_error(b.path + ".name: " + e.what());
    }
  }
  p.sigma = b.get<double>("sigma", p.sigma);
  p.tau = b.get<double>("tau", p.tau);
  p.beta_obj = b.get<double>("beta_obj", p.beta_obj);
  p.beta_probe_start = b.get<double>("beta_probe_start", p.beta_probe_start);
  p.beta_probe_end = b.get<double>("beta_probe_end", p.beta_probe_end);
  p.epochs = b.get<int>("epochs", p.epochs);
  p.shuffle_seed = b.get<std::uint64_t>("shuffle_seed", p.shuffle_seed);
  try {
    p.validate();
  } catch (const parameter_error& e) {
    throw config_error(b.path + ": " + e.what());
  }

  std::string init = b.get<std::string>("init", "ones");
  if (init == "ones") {
    cfg.random_init = false;
  } else if (init == "random") {
    cfg.random_init = true;
  } else {
    throw config_error(b.path + ".init: expected 'ones' or 'random'");
  }
  cfg.init_seed = b.get<std::uint64_t>("init_seed", 1);
}

SparsityConfig parse_sparsity(const Block& b) {
  b.reject_unknown({"keep_fraction", "seed"});
  SparsityConfig sp;
  sp.keep_fraction = b.get<double>("keep_fraction", 1.0);
  if (!std::isfinite(sp.keep_fraction) || sp.keep_fraction <= 0.0 ||
      sp.keep_fraction > 1.0) {
    throw config_error(b.path + ".keep_fraction: must be in (0,1]");
  }
  sp.seed = b.get<std::uint64_t>("seed", 1);
  return sp;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text,
                           const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw config_error(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw config_error("config: top level must be an object");

  Block root{j, "config"};
  root.reject_unknown(
      {"experiment", "output_dir", "simulation", "algorithm", "sparsity"});

  RunConfig cfg;
  cfg.experiment = root.get<std::string>("experiment", "experiment");
  cfg.output_dir = root.get<std::string>("output_dir", "out");
  if (auto sim = root.optional_child("simulation")) {
    cfg.simulation = parse_simulation(*sim, base_dir);
  }
  if (auto algo = root.optional_child("algorithm")) {
    parse_algorithm(*algo, cfg);
  }
  if (auto sp = root.optional_child("sparsity")) {
    cfg.sparsity = parse_sparsity(*sp);
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  std::filesystem::path base = path.parent_path();
  if (base.empty()) base = ".";
  return parse_run_config(buf.str(), base);
}

void apply_overrides(RunConfig& config, const CliOverrides& overrides) {
  if (overrides.output_dir) config.output_dir = *overrides.output_dir;
  if (overrides.algorithm) config.algorithm.algorithm = *overrides.algorithm;
  if (overrides.epochs) {
    if (*overrides.epochs < 1) throw config_error("--epochs: must be >= 1");
    config.algorithm.epochs = *overrides.epochs;
  }
  if (overrides.master_seed) {
    std::uint64_t s = *overrides.master_seed;
    config.simulation.noise_seed = mix_seed(s, 1);
    config.algorithm.shuffle_seed = mix_seed(s, 2);
    config.sparsity.seed = mix_seed(s, 3);
    config.init_seed = mix_seed(s, 4);
  }
  // rPIE rejects beta_obj = 1 that other algorithms accept.
  try {
    config.algorithm.validate();
  } catch (const parameter_error& e) {
    throw config_error(std::string("algorithm: ") + e.what());
  }
}

}  // namespace ptycho
