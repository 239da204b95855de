#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "ptycho/field.hpp"
#include "ptycho/sim.hpp"

namespace ptycho {

struct TracePoint {
  int epoch = 0;
  double r_factor = 0.0;
  double seconds = 0.0;
};

struct ConvergenceTrace {
  std::vector<TracePoint> points;
};

// CSV with header "epoch,r_factor,seconds"; r_factor at full precision.
void write_trace_csv(const ConvergenceTrace& trace, std::ostream& out);
void write_trace_csv(const ConvergenceTrace& trace,
                     const std::filesystem::path& path);

// Fourier-domain residual of the model against the stack: per pattern,
// sum| |fft2(P O_n)| - sqrt(I_n) | / sum sqrt(I_n), averaged over patterns.
// Zero-total patterns are excluded from the mean (with a warning).
double r_factor(const ComplexField& object, const ComplexField& probe,
                const DiffractionStack& stack);

// Noise floor: the R factor of the ground-truth model against its own noisy
// stack.
double r_noise(const ComplexField& truth_object, const ComplexField& truth_probe,
               const DiffractionStack& noisy_stack);

// Masked relative L2 error after removing the global phase:
//   phi* = arg(sum_mask conj(recon) * truth)
//   error = ||e^{i phi*} recon - truth||_mask / ||truth||_mask
struct AlignedError {
  double error = 0.0;
  double phase = 0.0;
};
AlignedError aligned_object_error(const ComplexField& recon,
                                  const ComplexField& truth, const Mask& mask);

// Object pixels where the accumulated sum of |probe|^2 over all positions
// exceeds threshold_fraction of its maximum.
Mask coverage_mask(const ComplexField& probe, const ScanGeometry& geometry,
                   double threshold_fraction);

// Removes the amplitude gauge (O -> aO, P -> P/a): rescales probe to carry
// `target_energy` total |P|^2 and the object inversely.
void normalize_probe_energy(ComplexField& object, ComplexField& probe,
                            double target_energy);

double probe_energy(const ComplexField& probe);

}  // namespace ptycho
