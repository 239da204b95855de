#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ptycho/field.hpp"

namespace ptycho {

// Raster scan layout: probe-sized subdomains of a larger object grid.
struct ScanGeometry {
  int probe_rows = 0;
  int probe_cols = 0;
  int object_rows = 0;
  int object_cols = 0;
  std::vector<Subdomain> positions;

  int num_positions() const { return int(positions.size()); }

  // Throws unless every position is probe-shaped and inside the object.
  void validate() const;
};

// Measured (or simulated) intensities, one probe-sized pattern per position.
struct DiffractionStack {
  ScanGeometry geometry;
  std::vector<RealGrid> patterns;
  std::optional<double> flux_per_position;
  std::optional<std::uint64_t> noise_seed;

  void validate() const;
};

// amp in [0,1] sets |O|, phase in [0,1] is stretched to [0, pi*phase_scale].
ComplexField make_test_object(const RealGrid& amp, const RealGrid& phase,
                              double phase_scale = 1.0);

// Ideal circular aperture: 1 inside the disc of `radius` pixels around the
// grid center (size/2, size/2), 0 outside. Strict inequality at the rim.
ComplexField make_circular_probe(int size, double radius);

// Row-major raster of probe-sized frames with the given step, as many per
// axis as fit.
ScanGeometry raster_geometry(int object_rows, int object_cols, int probe_size,
                             int step);

// Fractional intersection area of two discs of `radius` whose centers sit
// `step` apart. 1 at step 0, 0 once step >= 2*radius.
double overlap_fraction(double radius, double step);

// Noise-free forward model: pattern_n = |fft2(probe * O_n)|^2.
DiffractionStack forward_diffract(const ComplexField& object,
                                  const ComplexField& probe,
                                  const ScanGeometry& geometry);

// Scales each pattern to `flux_per_position` expected photons, draws Poisson
// counts (per-position stream mix_seed(seed, n)), scales back. All-zero
// patterns pass through with a warning.
DiffractionStack add_poisson_noise(const DiffractionStack& stack,
                                   double flux_per_position,
                                   std::uint64_t seed);

// Dose variant: one global count scale flux/reference_energy, so a pattern
// whose total equals reference_energy receives `flux` expected photons and
// dimmer (absorbing) frames receive proportionally fewer. The natural
// reference is the probe energy, i.e. the photons incident per position.
DiffractionStack add_poisson_noise_dose(const DiffractionStack& stack,
                                        double flux_per_position,
                                        double reference_energy,
                                        std::uint64_t seed);

// Keeps round(keep_fraction * N) positions chosen uniformly without
// replacement, preserving original order and pattern pairing.
DiffractionStack sample_subset(const DiffractionStack& stack,
                               double keep_fraction, std::uint64_t seed);

// Built-in procedural test images ("blobs"), values in [0,1]: an absorbing
// figure on a bright graded background, and smooth phase bumps.
RealGrid blobs_amplitude(int rows, int cols);
RealGrid blobs_phase(int rows, int cols);

// A full synthetic setup: source images centered in an object padded with
// 1+0i so the raster fits, plus the matching probe and geometry.
struct SimScene {
  ComplexField object;
  ComplexField probe;
  ScanGeometry geometry;
  Subdomain image_region;
};

SimScene make_scene(const RealGrid& amp_image, const RealGrid& phase_image,
                    double phase_scale, int probe_size, double probe_radius,
                    int step);

}  // namespace ptycho
