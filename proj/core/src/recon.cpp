#include "ptycho/recon.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <utility>

#include "ptycho/errors.hpp"
#include "ptycho/fft.hpp"
#include "ptycho/metrics.hpp"
#include "ptycho/rng.hpp"

namespace ptycho {

namespace {

// Relative epsilon keeping beta = 1 denominators away from exact zero at
// probe nulls. Small enough to sit below every stated numeric tolerance.
constexpr double kDenomEps = 1e-12;

void require_same_shape(const ComplexField& a, const ComplexField& b,
                        const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw shape_error(std::string(what) + ": operand shapes differ");
  }
}

void require_pattern_shape(const ComplexField& f, const RealGrid& g,
                           const char* what) {
  if (f.rows() != g.rows || f.cols() != g.cols) {
    throw shape_error(std::string(what) + ": field/pattern shapes differ");
  }
}

void require_unit_range(double v, const char* what) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
    throw parameter_error(std::string(what) + " must be in [0,1]");
  }
}

std::vector<int> shuffled_indices(int n, std::uint64_t seed) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (int i = n - 1; i > 0; --i) {
    int j = int(rng.uniform_below(std::uint64_t(i) + 1));
    std::swap(idx[std::size_t(i)], idx[std::size_t(j)]);
  }
  return idx;
}

}  // namespace

ComplexField random_object(int rows, int cols, std::uint64_t seed) {
  if (rows <= 0 || cols <= 0) {
    throw shape_error("random_object: dimensions must be positive");
  }
  Rng rng(seed);
  ComplexField obj(rows, cols);
  for (std::size_t i = 0; i < obj.size(); ++i) {
    obj[i] = std::polar(1.0, rng.uniform(-std::numbers::pi, std::numbers::pi));
  }
  return obj;
}

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::epie: return "epie";
    case Algorithm::rpie: return "rpie";
    case Algorithm::sirdr: return "sirdr";
  }
  throw parameter_error("unknown algorithm value");
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "epie") return Algorithm::epie;
  if (name == "rpie") return Algorithm::rpie;
  if (name == "sirdr") return Algorithm::sirdr;
  throw parameter_error("unknown algorithm '" + name +
                        "' (expected epie, rpie or sirdr)");
}

void AlgoParams::validate() const {
  require_unit_range(sigma, "sigma");
  require_unit_range(tau, "tau");
  if (!std::isfinite(beta_obj) || beta_obj <= 0.0 || beta_obj > 1.0) {
    throw parameter_error("beta_obj must be in (0,1]");
  }
  if (algorithm == Algorithm::rpie && beta_obj >= 1.0) {
    throw parameter_error("rpie: beta_obj must be in (0,1)");
  }
  auto check_beta_p = [](double v, const char* what) {
    if (!std::isfinite(v) || v <= 0.0 || v > 1.0) {
      throw parameter_error(std::string(what) + " must be in (0,1]");
    }
  };
  check_beta_p(beta_probe_start, "beta_probe_start");
  check_beta_p(beta_probe_end, "beta_probe_end");
  if (epochs < 1) throw parameter_error("epochs must be >= 1");
}

ComplexField project_magnitude(const ComplexField& psi,
                               const RealGrid& sqrt_intensity) {
  require_pattern_shape(psi, sqrt_intensity, "project_magnitude");
  for (double v : sqrt_intensity.data) {
    if (!std::isfinite(v) || v < 0.0) {
      throw parameter_error("project_magnitude: sqrt_intensity must be >= 0");
    }
  }
  ComplexField z = fft2(psi);
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = sqrt_intensity.data[i] * phase_factor(z[i]);
  }
  return ifft2(z);
}

ComplexField relaxed_fourier_step(const ComplexField& z,
                                  const RealGrid& sqrt_intensity, double tau) {
  require_pattern_shape(z, sqrt_intensity, "relaxed_fourier_step");
  require_unit_range(tau, "tau");
  ComplexField out(z.rows(), z.cols());
  for (std::size_t i = 0; i < z.size(); ++i) {
    double s = sqrt_intensity.data[i];
    if (!std::isfinite(s) || s < 0.0) {
      throw parameter_error("relaxed_fourier_step: sqrt_intensity must be >= 0");
    }
    out[i] = (1.0 - tau) * s * phase_factor(z[i]) + tau * z[i];
  }
  return out;
}

ExitWaveUpdate sirdr_exitwave_update(const ComplexField& object_patch,
                                     const ComplexField& probe,
                                     const ComplexField& z_prev,
                                     const RealGrid& sqrt_intensity,
                                     double sigma, double tau) {
  require_same_shape(object_patch, probe, "sirdr_exitwave_update");
  require_same_shape(object_patch, z_prev, "sirdr_exitwave_update");
  require_pattern_shape(object_patch, sqrt_intensity, "sirdr_exitwave_update");
  require_unit_range(sigma, "sigma");

  ComplexField z_s = fft2(multiply(probe, object_patch));
  ComplexField zhat(z_s.rows(), z_s.cols());
  for (std::size_t i = 0; i < z_s.size(); ++i) {
    zhat[i] = (1.0 + sigma) * z_s[i] - sigma * z_prev[i];
  }
  ComplexField z = relaxed_fourier_step(zhat, sqrt_intensity, tau);
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] += sigma * (z_prev[i] - z_s[i]);
  }
  ExitWaveUpdate out;
  out.psi = ifft2(z);
  out.z = std::move(z);
  return out;
}

ComplexField semi_implicit_object_update(const ComplexField& object_patch,
                                         const ComplexField& probe,
                                         const ComplexField& psi,
                                         double beta_obj) {
  require_same_shape(object_patch, probe, "semi_implicit_object_update");
  require_same_shape(object_patch, psi, "semi_implicit_object_update");
  if (!std::isfinite(beta_obj) || beta_obj <= 0.0 || beta_obj > 1.0) {
    throw parameter_error("semi_implicit_object_update: beta must be in (0,1]");
  }
  double m = max_sq_norm(probe);
  if (m == 0.0) {
    throw degenerate_error("semi_implicit_object_update: probe is identically zero");
  }
  double keep = (1.0 - beta_obj) * m;
  double eps = kDenomEps * m;
  ComplexField out(object_patch.rows(), object_patch.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    cdouble num = keep * object_patch[i] + beta_obj * std::conj(probe[i]) * psi[i];
    double den = keep + beta_obj * std::norm(probe[i]) + eps;
    out[i] = num / den;
  }
  return out;
}

ComplexField epie_object_update(const ComplexField& object_patch,
                                const ComplexField& probe,
                                const ComplexField& psi, double beta_obj) {
  require_same_shape(object_patch, probe, "epie_object_update");
  require_same_shape(object_patch, psi, "epie_object_update");
  if (!std::isfinite(beta_obj) || beta_obj <= 0.0 || beta_obj > 1.0) {
    throw parameter_error("epie_object_update: beta must be in (0,1]");
  }
  double m = max_sq_norm(probe);
  if (m == 0.0) {
    throw degenerate_error("epie_object_update: probe is identically zero");
  }
  ComplexField out(object_patch.rows(), object_patch.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    cdouble residual = probe[i] * object_patch[i] - psi[i];
    out[i] = object_patch[i] - beta_obj * std::conj(probe[i]) * residual / m;
  }
  return out;
}

ComplexField rpie_object_update(const ComplexField& object_patch,
                                const ComplexField& probe,
                                const ComplexField& psi, double beta_obj) {
  require_same_shape(object_patch, probe, "rpie_object_update");
  require_same_shape(object_patch, psi, "rpie_object_update");
  if (!std::isfinite(beta_obj) || beta_obj <= 0.0 || beta_obj >= 1.0) {
    throw parameter_error("rpie_object_update: beta must be in (0,1)");
  }
  double m = max_sq_norm(probe);
  if (m == 0.0) {
    throw degenerate_error("rpie_object_update: probe is identically zero");
  }
  double keep = (1.0 - beta_obj) * m;
  double eps = kDenomEps * m;
  ComplexField out(object_patch.rows(), object_patch.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    cdouble step = std::conj(probe[i]) * (psi[i] - probe[i] * object_patch[i]);
    out[i] = object_patch[i] + step / (keep + beta_obj * std::norm(probe[i]) + eps);
  }
  return out;
}

ComplexField pie_probe_update(const ComplexField& probe,
                              const ComplexField& object_patch,
                              const ComplexField& psi, double beta_probe) {
  require_same_shape(probe, object_patch, "pie_probe_update");
  require_same_shape(probe, psi, "pie_probe_update");
  require_unit_range(beta_probe, "beta_probe");
  double m = max_sq_norm(object_patch);
  if (m == 0.0) {
    throw degenerate_error("pie_probe_update: object patch is identically zero");
  }
  ComplexField out(probe.rows(), probe.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    cdouble residual = probe[i] * object_patch[i] - psi[i];
    out[i] = probe[i] - beta_probe * std::conj(object_patch[i]) * residual / m;
  }
  return out;
}

double beta_p_schedule(int epoch, int total_epochs, double start, double end) {
  if (total_epochs < 1) throw parameter_error("beta_p_schedule: epochs must be >= 1");
  if (epoch < 0 || epoch >= total_epochs) {
    throw parameter_error("beta_p_schedule: epoch out of range");
  }
  if (total_epochs == 1) return start;
  return start + (end - start) * double(epoch) / double(total_epochs - 1);
}

ReconState run_reconstruction(const DiffractionStack& stack,
                              const AlgoParams& params, const ReconInit& init,
                              const RunOptions& options) {
  stack.validate();
  params.validate();
  const ScanGeometry& g = stack.geometry;
  const int n_pos = g.num_positions();

  ReconState state;
  state.object = init.object ? *init.object
                             : ComplexField::ones(g.object_rows, g.object_cols);
  state.probe =
      init.probe ? *init.probe : ComplexField::ones(g.probe_rows, g.probe_cols);
  if (state.object.rows() != g.object_rows ||
      state.object.cols() != g.object_cols) {
    throw shape_error("run_reconstruction: init object shape differs from geometry");
  }
  if (state.probe.rows() != g.probe_rows || state.probe.cols() != g.probe_cols) {
    throw shape_error("run_reconstruction: init probe shape differs from geometry");
  }

  std::vector<RealGrid> sqrt_i(std::size_t(n_pos),
                               RealGrid(g.probe_rows, g.probe_cols));
  for (int n = 0; n < n_pos; ++n) {
    const RealGrid& pat = stack.patterns[std::size_t(n)];
    for (std::size_t i = 0; i < pat.data.size(); ++i) {
      sqrt_i[std::size_t(n)].data[i] = std::sqrt(pat.data[i]);
    }
  }

  const bool sirdr = params.algorithm == Algorithm::sirdr;
  if (sirdr) {
    state.z_store.reserve(std::size_t(n_pos));
    for (int n = 0; n < n_pos; ++n) {
      state.z_store.push_back(fft2(
          multiply(state.probe, extract(state.object, g.positions[std::size_t(n)]))));
    }
  }

  ComplexField patch(g.probe_rows, g.probe_cols);
  const auto t0 = std::chrono::steady_clock::now();
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    double beta_p = beta_p_schedule(epoch, params.epochs,
                                    params.beta_probe_start,
                                    params.beta_probe_end);
    std::vector<int> order =
        shuffled_indices(n_pos, mix_seed(params.shuffle_seed, std::uint64_t(epoch)));
    for (int n : order) {
      const Subdomain& pos = g.positions[std::size_t(n)];
      extract_into(patch, state.object, pos);
      ComplexField psi;
      switch (params.algorithm) {
        case Algorithm::epie:
        case Algorithm::rpie:
          psi = project_magnitude(multiply(state.probe, patch),
                                  sqrt_i[std::size_t(n)]);
          break;
        case Algorithm::sirdr: {
          ExitWaveUpdate up = sirdr_exitwave_update(
              patch, state.probe, state.z_store[std::size_t(n)],
              sqrt_i[std::size_t(n)], params.sigma, params.tau);
          psi = std::move(up.psi);
          state.z_store[std::size_t(n)] = std::move(up.z);
          break;
        }
      }
      ComplexField new_patch;
      switch (params.algorithm) {
        case Algorithm::epie:
          new_patch = epie_object_update(patch, state.probe, psi, params.beta_obj);
          break;
        case Algorithm::rpie:
          new_patch = rpie_object_update(patch, state.probe, psi, params.beta_obj);
          break;
        case Algorithm::sirdr:
          new_patch = semi_implicit_object_update(patch, state.probe, psi,
                                                  params.beta_obj);
          break;
      }
      if (beta_p > 0.0) {
        state.probe = pie_probe_update(state.probe, new_patch, psi, beta_p);
      }
      write_into(state.object, pos, new_patch);
    }

    if (!all_finite(state.object) || !all_finite(state.probe)) {
      throw divergence_error(epoch, "reconstruction diverged at epoch " +
                                        std::to_string(epoch));
    }
    bool record = options.trace_every > 0 &&
                  (epoch % options.trace_every == 0 || epoch == params.epochs - 1);
    if (record) {
      double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      state.trace.points.push_back(
          TracePoint{epoch, r_factor(state.object, state.probe, stack), seconds});
    }
    state.epochs_run = epoch + 1;
  }
  return state;
}

}  // namespace ptycho
