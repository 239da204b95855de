// Acceptance gate: one pass/fail line per criterion, exit code = number of
// failures. Reconstruction runs use the same frozen seeds and schedules as
// the shipped experiment configs, so the printed errors are reproducible.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <exception>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "ptycho/fft.hpp"
#include "ptycho/field.hpp"
#include "ptycho/metrics.hpp"
#include "ptycho/recon.hpp"
#include "ptycho/rng.hpp"
#include "ptycho/sim.hpp"
#include "ptycho/stack_io.hpp"

using namespace ptycho;

namespace {

int g_failures = 0;

void report(int id, bool ok, const std::string& what) {
  std::printf("[%s] %d: %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string str(double v, const char* fmt = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

ComplexField random_field(Rng& rng, int rows, int cols) {
  ComplexField f(rows, cols);
  for (std::size_t i = 0; i < f.size(); ++i)
    f[i] = cdouble(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  return f;
}

RealGrid random_sqrt_intensity(Rng& rng, int rows, int cols) {
  RealGrid g(rows, cols);
  for (auto& v : g.data) v = rng.uniform(0.0, 2.0);
  return g;
}

double max_abs_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double median5(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[2];
}

// The shared experiment setup: built-in test images behind a full-frame
// probe, one dense scan (high overlap) and one sparse 3x3 scan.
struct Bench {
  SimScene dense;
  DiffractionStack dense_clean;
  DiffractionStack dense_noisy;  // dose 1e8, seed 7
  Mask dense_mask;
  SimScene sparse;
  DiffractionStack sparse_clean;
  Mask sparse_mask;
  double ref_energy = 0.0;  // photons per position = probe energy
};

Bench make_bench() {
  Bench b;
  RealGrid amp = blobs_amplitude(128, 128);
  RealGrid phase = blobs_phase(128, 128);
  b.dense = make_scene(amp, phase, 1.0, 128, 50.0, 35);
  b.dense_clean =
      forward_diffract(b.dense.object, b.dense.probe, b.dense.geometry);
  b.ref_energy = probe_energy(b.dense.probe);
  b.dense_noisy = add_poisson_noise_dose(b.dense_clean, 1e8, b.ref_energy, 7);
  b.dense_mask = coverage_mask(b.dense.probe, b.dense.geometry, 0.1);
  b.sparse = make_scene(amp, phase, 1.0, 128, 50.0, 50);
  b.sparse_clean =
      forward_diffract(b.sparse.object, b.sparse.probe, b.sparse.geometry);
  b.sparse_mask = coverage_mask(b.sparse.probe, b.sparse.geometry, 0.1);
  return b;
}

AlgoParams experiment_params(Algorithm a, int epochs, std::uint64_t shuffle) {
  AlgoParams p;
  p.algorithm = a;
  p.sigma = 0.85;
  p.tau = 0.1;
  p.beta_obj = 0.9;
  p.beta_probe_start = 0.02;
  p.beta_probe_end = 0.3;
  p.epochs = epochs;
  p.shuffle_seed = shuffle;
  return p;
}

// Gauge-fixed reconstruction error: amplitude gauge removed by pinning the
// probe energy, global phase removed inside aligned_object_error.
double scored_error(ReconState s, const SimScene& scene, const Mask& mask,
                    double ref_energy) {
  normalize_probe_energy(s.object, s.probe, ref_energy);
  return aligned_object_error(s.object, scene.object, mask).error;
}

// --- independent oracles for criterion 5 -----------------------------------

cdouble unit_phase(cdouble z) {
  double a = std::abs(z);
  return a == 0.0 ? cdouble(1.0, 0.0) : z / a;
}

// Difference map / Douglas-Rachford spelled out from the textbook form
// z + P_M(2 z_s - z) - z_s on the Fourier iterate.
ComplexField dm_step(const ComplexField& z_prev, const ComplexField& z_s,
                     const RealGrid& sqrt_intensity) {
  ComplexField out(z_prev.rows(), z_prev.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    cdouble pm = sqrt_intensity.data[i] * unit_phase(2.0 * z_s[i] - z_prev[i]);
    out[i] = z_prev[i] + pm - z_s[i];
  }
  return out;
}

// RAAR in its beta/2 (R_M R_S + I) + (1-beta) P_S form, expanded to
// beta (P_M(2 z_s - z) + z - z_s) + (1-beta) z_s.
ComplexField raar_step(const ComplexField& z_prev, const ComplexField& z_s,
                       const RealGrid& sqrt_intensity, double beta) {
  ComplexField out(z_prev.rows(), z_prev.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    cdouble pm = sqrt_intensity.data[i] * unit_phase(2.0 * z_s[i] - z_prev[i]);
    out[i] = beta * (pm + z_prev[i] - z_s[i]) + (1.0 - beta) * z_s[i];
  }
  return out;
}

// Straight-line recomputation of the Fourier residual for criterion 8.
double r_factor_by_hand(const ComplexField& object, const ComplexField& probe,
                        const DiffractionStack& stack) {
  double acc = 0.0;
  int used = 0;
  for (int n = 0; n < stack.geometry.num_positions(); ++n) {
    ComplexField f = fft2(
        multiply(probe, extract(object, stack.geometry.positions[n])));
    double num = 0.0, den = 0.0;
    const RealGrid& pat = stack.patterns[n];
    for (std::size_t i = 0; i < f.size(); ++i) {
      double s = std::sqrt(pat.data[i]);
      num += std::abs(std::abs(f[i]) - s);
      den += s;
    }
    if (den > 0.0) {
      acc += num / den;
      ++used;
    }
  }
  return used > 0 ? acc / used : 0.0;
}

// --- criteria ---------------------------------------------------------------

void c1_overlap() {
  double f35 = overlap_fraction(50.0, 35.0);
  double f50 = overlap_fraction(50.0, 50.0);
  bool ok = std::abs(f35 - 0.564) <= 0.001 && std::abs(f50 - 0.391) <= 0.001;
  report(1, ok,
         "disc overlap fractions: step 35 -> " + str(f35) +
             " (0.564 +/- 0.001), step 50 -> " + str(f50) +
             " (0.391 +/- 0.001)");
}

void c2_noise_floor(const Bench& b) {
  double sum = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    DiffractionStack noisy =
        add_poisson_noise_dose(b.dense_clean, 1e8, b.ref_energy, seed);
    sum += r_noise(b.dense.object, b.dense.probe, noisy);
  }
  double mean = sum / 5.0;
  bool ok = mean >= 0.0333 && mean <= 0.0413;
  report(2, ok,
         "noise floor at 1e8 photons/position: mean R over 5 seeds = " +
             str(mean) + " (expect 0.0373 +/- 0.004)");
}

void c3_dense_recovery(const Bench& b) {
  ReconInit init;
  init.object = random_object(b.dense.geometry.object_rows,
                              b.dense.geometry.object_cols, 11);
  init.probe = make_circular_probe(128, 50.0);
  RunOptions quiet{.trace_every = 0};

  auto t0 = std::chrono::steady_clock::now();
  double err[3];
  Algorithm algos[3] = {Algorithm::epie, Algorithm::rpie, Algorithm::sirdr};
  for (int i = 0; i < 3; ++i) {
    ReconState s = run_reconstruction(
        b.dense_noisy, experiment_params(algos[i], 300, 3), init, quiet);
    err[i] = scored_error(std::move(s), b.dense, b.dense_mask, b.ref_energy);
  }
  double secs = elapsed_s(t0);
  bool ok = err[0] < 0.10 && err[1] < 0.10 && err[2] < 0.10 && secs < 120.0;
  report(3, ok,
         "dense noisy recovery (300 epochs, shared random start): epie=" +
             str(err[0], "%.4f") + " rpie=" + str(err[1], "%.4f") +
             " sirdr=" + str(err[2], "%.4f") + " (each < 0.10), " +
             str(secs, "%.1f") + "s (< 120s)");
}

void c4_sparse_separation(const Bench& b) {
  RunOptions quiet{.trace_every = 0};
  std::vector<double> errs[3];
  Algorithm algos[3] = {Algorithm::epie, Algorithm::rpie, Algorithm::sirdr};

  auto t0 = std::chrono::steady_clock::now();
  for (std::uint64_t k = 1; k <= 5; ++k) {
    DiffractionStack noisy =
        add_poisson_noise_dose(b.sparse_clean, 1e8, b.ref_energy, k);
    ReconInit init;
    init.object = random_object(b.sparse.geometry.object_rows,
                                b.sparse.geometry.object_cols, k + 100);
    init.probe = make_circular_probe(128, 50.0);
    for (int i = 0; i < 3; ++i) {
      ReconState s = run_reconstruction(
          noisy, experiment_params(algos[i], 1000, k + 200), init, quiet);
      errs[i].push_back(
          scored_error(std::move(s), b.sparse, b.sparse_mask, b.ref_energy));
    }
  }
  double secs = elapsed_s(t0);
  double med_epie = median5(errs[0]);
  double med_rpie = median5(errs[1]);
  double med_sirdr = median5(errs[2]);
  bool ok = med_sirdr < 0.15 && med_epie > 2.0 * med_sirdr &&
            med_rpie > 2.0 * med_sirdr && secs < 180.0;
  report(4, ok,
         "sparse 3x3 medians over 5 seeds (1000 epochs): sirdr=" +
             str(med_sirdr, "%.3f") + " (< 0.15), epie=" +
             str(med_epie, "%.3f") + ", rpie=" + str(med_rpie, "%.3f") +
             " (each > 2x sirdr), " + str(secs, "%.1f") + "s (< 180s)");
}

void c5_limit_equivalences() {
  double worst_dm = 0.0, worst_raar = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(mix_seed(5000, seed));
    ComplexField object = random_field(rng, 16, 16);
    ComplexField probe = random_field(rng, 16, 16);
    ComplexField z_prev = random_field(rng, 16, 16);
    RealGrid sqrt_i = random_sqrt_intensity(rng, 16, 16);
    ComplexField z_s = fft2(multiply(probe, object));

    ExitWaveUpdate lib =
        sirdr_exitwave_update(object, probe, z_prev, sqrt_i, 1.0, 0.0);
    ComplexField want = dm_step(z_prev, z_s, sqrt_i);
    worst_dm = std::max(worst_dm, max_abs_diff(lib.z, want));
    worst_dm = std::max(worst_dm, max_abs_diff(lib.psi, ifft2(want)));

    for (double tau : {0.1, 0.25}) {
      lib = sirdr_exitwave_update(object, probe, z_prev, sqrt_i, 1.0, tau);
      want = raar_step(z_prev, z_s, sqrt_i, 1.0 - tau);
      worst_raar = std::max(worst_raar, max_abs_diff(lib.z, want));
      worst_raar = std::max(worst_raar, max_abs_diff(lib.psi, ifft2(want)));
    }
  }
  bool ok = worst_dm < 1e-10 && worst_raar < 1e-10;
  report(5, ok,
         "sigma=1 reductions on 20 random instances: |diff| vs difference "
         "map = " + str(worst_dm, "%.2e") + ", vs RAAR(beta=1-tau) = " +
             str(worst_raar, "%.2e") + " (each < 1e-10)");
}

void c6_semi_implicit() {
  // field-level balance equation
  double worst_res = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(mix_seed(6000, seed));
    ComplexField object = random_field(rng, 16, 16);
    ComplexField probe = random_field(rng, 16, 16);
    ComplexField psi = random_field(rng, 16, 16);
    double m = max_sq_norm(probe);
    for (double beta : {0.3, 0.9, 1.0}) {
      ComplexField out = semi_implicit_object_update(object, probe, psi, beta);
      for (std::size_t i = 0; i < out.size(); ++i) {
        cdouble res = (1.0 - beta) * m * (out[i] - object[i]) +
                      beta * std::conj(probe[i]) * (probe[i] * out[i] - psi[i]);
        worst_res = std::max(
            worst_res,
            std::abs(res) / (m * std::max(1.0, std::abs(out[i]))));
      }
    }
  }

  // scalar prox property: no nearby point improves the implicit objective
  Rng rng(777);
  int improvable = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    cdouble o(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
    cdouble p(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
    cdouble target(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
    double beta = rng.uniform(0.05, 1.0);
    if (std::abs(p) < 0.1) p += cdouble(0.5, 0.0);

    ComplexField fo(1, 1, o), fp(1, 1, p), fpsi(1, 1, target);
    cdouble x = semi_implicit_object_update(fo, fp, fpsi, beta)(0, 0);
    double m = std::norm(p);
    auto f = [&](cdouble v) {
      return (1.0 - beta) * m * std::norm(v - o) +
             beta * std::norm(p * v - target);
    };
    double fx = f(x);
    for (double step : {1e-3, 1e-2, 0.1}) {
      for (int dir = 0; dir < 8; ++dir) {
        double a = 2.0 * std::numbers::pi * dir / 8.0;
        if (f(x + step * std::polar(1.0, a)) < fx - 1e-12) ++improvable;
      }
    }
  }
  bool ok = worst_res < 1e-10 && improvable == 0;
  report(6, ok,
         "semi-implicit update: balance residual = " + str(worst_res, "%.2e") +
             " (< 1e-10); improvable scalar prox trials = " +
             std::to_string(improvable) + " of 1000 (expect 0)");
}

void c7_stability(const Bench& b) {
  // noise-free data + ground-truth start must be (numerically) a fixed point
  RunOptions quiet{.trace_every = 0};
  ReconInit truth_init;
  truth_init.object = b.dense.object;
  truth_init.probe = b.dense.probe;
  double worst_err = 0.0, worst_probe = 0.0;
  for (Algorithm a : {Algorithm::epie, Algorithm::rpie, Algorithm::sirdr}) {
    AlgoParams p = experiment_params(a, 20, 3);
    p.beta_probe_start = 0.1;
    p.beta_probe_end = 0.1;
    ReconState s = run_reconstruction(b.dense_clean, p, truth_init, quiet);
    worst_probe = std::max(worst_probe, max_abs_diff(s.probe, b.dense.probe));
    worst_err = std::max(
        worst_err,
        scored_error(std::move(s), b.dense, b.dense_mask, b.ref_energy));
  }

  // magnitude projection is idempotent
  Rng rng(909);
  ComplexField z = random_field(rng, 128, 128);
  RealGrid sqrt_i = random_sqrt_intensity(rng, 128, 128);
  ComplexField p1 = project_magnitude(z, sqrt_i);
  double idem = max_abs_diff(project_magnitude(p1, sqrt_i), p1);

  bool ok = worst_err < 1e-6 && worst_probe < 1e-6 && idem < 1e-10;
  report(7, ok,
         "truth start on clean data, 20 epochs: object drift = " +
             str(worst_err, "%.2e") + ", probe drift = " +
             str(worst_probe, "%.2e") + " (each < 1e-6); projection "
             "idempotence = " + str(idem, "%.2e") + " (< 1e-10)");
}

void c8_metric_checks(const Bench& b) {
  double lib = r_factor(b.dense.object, b.dense.probe, b.dense_noisy);
  double hand = r_factor_by_hand(b.dense.object, b.dense.probe, b.dense_noisy);
  double rdiff = std::abs(lib - hand);

  // a distorted copy of the truth; global phase must not move the error
  Rng rng(4242);
  ComplexField recon = b.dense.object;
  for (std::size_t i = 0; i < recon.size(); ++i)
    recon[i] = 1.1 * recon[i] +
               0.05 * cdouble(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  double e0 =
      aligned_object_error(recon, b.dense.object, b.dense_mask).error;
  double worst_phase = 0.0;
  for (double theta : {0.3, 1.7, -2.4, std::numbers::pi}) {
    ComplexField rotated = recon;
    cdouble w = std::polar(1.0, theta);
    for (std::size_t i = 0; i < rotated.size(); ++i) rotated[i] *= w;
    double e = aligned_object_error(rotated, b.dense.object, b.dense_mask).error;
    worst_phase = std::max(worst_phase, std::abs(e - e0));
  }

  bool ok = rdiff < 1e-12 && worst_phase < 1e-12;
  report(8, ok,
         "R factor vs straight-line recomputation: |diff| = " +
             str(rdiff, "%.2e") + " (< 1e-12); aligned-error drift under "
             "global phase = " + str(worst_phase, "%.2e") + " (< 1e-12)");
}

void c9_determinism(const Bench& b) {
  ReconInit init;
  init.object = random_object(b.dense.geometry.object_rows,
                              b.dense.geometry.object_cols, 11);
  init.probe = make_circular_probe(128, 50.0);
  AlgoParams p = experiment_params(Algorithm::sirdr, 10, 3);
  ReconState s1 = run_reconstruction(b.dense_noisy, p, init);
  ReconState s2 = run_reconstruction(b.dense_noisy, p, init);

  bool same = s1.object == s2.object && s1.probe == s2.probe &&
              s1.z_store == s2.z_store && s1.epochs_run == s2.epochs_run &&
              s1.trace.points.size() == s2.trace.points.size();
  if (same) {
    for (std::size_t i = 0; i < s1.trace.points.size(); ++i) {
      const TracePoint& a = s1.trace.points[i];
      const TracePoint& c = s2.trace.points[i];
      // timing column is excluded, everything else must match bitwise
      if (a.epoch != c.epoch ||
          std::memcmp(&a.r_factor, &c.r_factor, sizeof(double)) != 0)
        same = false;
    }
  }

  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "ptysolve_acceptance_stack";
  fs::remove_all(dir);
  save_stack(b.dense_noisy, dir);
  DiffractionStack loaded = load_stack(dir);
  fs::remove_all(dir);

  bool roundtrip = loaded.patterns.size() == b.dense_noisy.patterns.size() &&
                   loaded.geometry.positions == b.dense_noisy.geometry.positions &&
                   loaded.geometry.object_rows == b.dense_noisy.geometry.object_rows &&
                   loaded.geometry.object_cols == b.dense_noisy.geometry.object_cols &&
                   loaded.flux_per_position == b.dense_noisy.flux_per_position &&
                   loaded.noise_seed == b.dense_noisy.noise_seed;
  if (roundtrip) {
    for (std::size_t n = 0; n < loaded.patterns.size(); ++n) {
      const auto& x = loaded.patterns[n].data;
      const auto& y = b.dense_noisy.patterns[n].data;
      if (x.size() != y.size() ||
          std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) != 0)
        roundtrip = false;
    }
  }

  bool ok = same && roundtrip;
  report(9, ok,
         std::string("repeated run identical (") +
             std::to_string(s1.trace.points.size()) +
             " trace points, timing excluded): " + (same ? "yes" : "NO") +
             "; stack save/load bit-exact: " + (roundtrip ? "yes" : "NO"));
}

}  // namespace

int main() {
  auto t0 = std::chrono::steady_clock::now();
  Bench b;
  try {
    b = make_bench();
  } catch (const std::exception& e) {
    std::printf("[FAIL] setup: %s\n", e.what());
    return 9;
  }

  struct Criterion {
    int id;
    void (*fn)(const Bench&);
  };
  auto wrap1 = [](const Bench&) { c1_overlap(); };
  auto wrap5 = [](const Bench&) { c5_limit_equivalences(); };
  auto wrap6 = [](const Bench&) { c6_semi_implicit(); };
  const Criterion criteria[] = {
      {1, wrap1},          {2, c2_noise_floor},    {3, c3_dense_recovery},
      {4, c4_sparse_separation}, {5, wrap5},       {6, wrap6},
      {7, c7_stability},   {8, c8_metric_checks},  {9, c9_determinism},
  };
  for (const Criterion& c : criteria) {
    try {
      c.fn(b);
    } catch (const std::exception& e) {
      report(c.id, false, std::string("exception: ") + e.what());
    }
  }

  std::printf("acceptance: %d/9 passed, %.1fs total\n", 9 - g_failures,
              elapsed_s(t0));
  return g_failures;
}
