#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ptycho/field.hpp"
#include "ptycho/metrics.hpp"
#include "ptycho/sim.hpp"

namespace ptycho {

enum class Algorithm { epie, rpie, sirdr };

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

struct AlgoParams {
  Algorithm algorithm = Algorithm::sirdr;
  double sigma = 1.0;              // reflection relaxation (sir-DR), [0,1]
  double tau = 0.1;                // Fourier magnitude relaxation, [0,1]
  double beta_obj = 0.9;           // object step
  double beta_probe_start = 1.0;   // probe step schedule endpoints, (0,1]
  double beta_probe_end = 0.1;
  int epochs = 300;
  std::uint64_t shuffle_seed = 0;

  void validate() const;
};

struct ReconInit {
  std::optional<ComplexField> object;  // default: all-ones at geometry size
  std::optional<ComplexField> probe;   // default: all-ones
};

// Uninformative random start: unit amplitude, phase uniform in (-pi, pi).
ComplexField random_object(int rows, int cols, std::uint64_t seed);

struct ReconState {
  ComplexField object;
  ComplexField probe;
  std::vector<ComplexField> z_store;  // sir-DR Fourier iterates, else empty
  int epochs_run = 0;
  ConvergenceTrace trace;
};

// |fft| replaced by sqrt_intensity, phases kept, back-transformed.
// Idempotent; throws parameter_error on negative sqrt_intensity entries.
ComplexField project_magnitude(const ComplexField& psi,
                               const RealGrid& sqrt_intensity);

// Pointwise (1-tau) * sqrt_intensity * phase(z) + tau * z (Fourier side).
ComplexField relaxed_fourier_step(const ComplexField& z,
                                  const RealGrid& sqrt_intensity, double tau);

// One relaxed Douglas-Rachford step on the Fourier iterate:
//   Z_S  = fft2(probe * object_patch)
//   Zhat = (1+sigma) Z_S - sigma Z_prev
//   Z_T  = relaxed_fourier_step(Zhat, sqrt_intensity, tau)
//   Z    = Z_T + sigma (Z_prev - Z_S)
// Returns psi = ifft2(Z) together with the new iterate Z.
struct ExitWaveUpdate {
  ComplexField psi;
  ComplexField z;
};
ExitWaveUpdate sirdr_exitwave_update(const ComplexField& object_patch,
                                     const ComplexField& probe,
                                     const ComplexField& z_prev,
                                     const RealGrid& sqrt_intensity,
                                     double sigma, double tau);

// Semi-implicit object update with M = max|probe|^2:
//   O = ((1-beta) M O_n + beta conj(P) psi) / ((1-beta) M + beta |P|^2)
// beta in (0,1]; a tiny epsilon * M in the denominator guards beta = 1 at
// probe zeros.
ComplexField semi_implicit_object_update(const ComplexField& object_patch,
                                         const ComplexField& probe,
                                         const ComplexField& psi,
                                         double beta_obj);

// Classic PIE object step: O = O_n - beta conj(P)(P O_n - psi) / max|P|^2.
ComplexField epie_object_update(const ComplexField& object_patch,
                                const ComplexField& probe,
                                const ComplexField& psi, double beta_obj);

// rPIE object step with the interpolated denominator
// (1-beta) max|P|^2 + beta |P|^2; beta in (0,1).
ComplexField rpie_object_update(const ComplexField& object_patch,
                                const ComplexField& probe,
                                const ComplexField& psi, double beta_obj);

// Probe step against the already-updated object patch:
//   P = P - beta conj(O)(P O - psi) / max|O|^2.
// beta in [0,1]; 0 freezes the probe (schedule tail).
ComplexField pie_probe_update(const ComplexField& probe,
                              const ComplexField& object_patch,
                              const ComplexField& psi, double beta_probe);

// Linear interpolation start -> end over epochs; a single epoch gets start.
double beta_p_schedule(int epoch, int total_epochs, double start, double end);

// Trace sampling control: record every k-th epoch plus the last (1 = every
// epoch, 0 = no trace). Evaluating R_F costs an extra forward pass, so batch
// sweeps that only need the end state run with tracing off.
struct RunOptions {
  int trace_every = 1;
};

// Full reconstruction: per epoch, a freshly shuffled pass over all positions
// (object update, then probe update, sequential over positions), then one
// trace sample (epoch, R_F, cumulative seconds). Missing init fields default
// to all-ones. Throws divergence_error when the state goes non-finite.
ReconState run_reconstruction(const DiffractionStack& stack,
                              const AlgoParams& params,
                              const ReconInit& init = {},
                              const RunOptions& options = {});

}  // namespace ptycho
