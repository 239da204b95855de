#include "ptycho/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <ostream>

#include "ptycho/errors.hpp"
#include "ptycho/fft.hpp"
#include "ptycho/parallel.hpp"

namespace ptycho {

void write_trace_csv(const ConvergenceTrace& trace, std::ostream& out) {
  out << "epoch,r_factor,seconds\n";
  char line[128];
  for (const TracePoint& p : trace.points) {
    std::snprintf(line, sizeof(line), "%d,%.17g,%.6f\n", p.epoch, p.r_factor,
                  p.seconds);
    out << line;
  }
}

void write_trace_csv(const ConvergenceTrace& trace,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  write_trace_csv(trace, out);
  if (!out.good()) throw io_error("write failed: " + path.string());
}

double r_factor(const ComplexField& object, const ComplexField& probe,
                const DiffractionStack& stack) {
  stack.validate();
  const ScanGeometry& g = stack.geometry;
  if (probe.rows() != g.probe_rows || probe.cols() != g.probe_cols) {
    throw shape_error("r_factor: probe shape differs from geometry");
  }
  if (object.rows() != g.object_rows || object.cols() != g.object_cols) {
    throw shape_error("r_factor: object shape differs from geometry");
  }

  const int n_pat = g.num_positions();
  std::vector<double> ratios(std::size_t(n_pat), 0.0);
  std::vector<std::uint8_t> included(std::size_t(n_pat), 1);
  parallel_for(n_pat, [&](int n) {
    const RealGrid& pat = stack.patterns[std::size_t(n)];
    double num = 0.0;
    double den = 0.0;
    ComplexField z =
        fft2(multiply(probe, extract(object, g.positions[std::size_t(n)])));
    for (std::size_t i = 0; i < z.size(); ++i) {
      double s = std::sqrt(pat.data[i]);
      num += std::abs(std::abs(z[i]) - s);
      den += s;
    }
    if (den == 0.0) {
      included[std::size_t(n)] = 0;
      return;
    }
    ratios[std::size_t(n)] = num / den;
  });

  double sum = 0.0;
  int kept = 0;
  for (int n = 0; n < n_pat; ++n) {
    if (!included[std::size_t(n)]) {
      std::cerr << "warning: pattern " << n
                << " has zero total intensity, excluded from R factor\n";
      continue;
    }
    sum += ratios[std::size_t(n)];
    ++kept;
  }
  if (kept == 0) {
    std::cerr << "warning: all patterns empty, R factor reported as 0\n";
    return 0.0;
  }
  return sum / double(kept);
}

double r_noise(const ComplexField& truth_object, const ComplexField& truth_probe,
               const DiffractionStack& noisy_stack) {
  return r_factor(truth_object, truth_probe, noisy_stack);
}

AlignedError aligned_object_error(const ComplexField& recon,
                                  const ComplexField& truth, const Mask& mask) {
  if (recon.rows() != truth.rows() || recon.cols() != truth.cols() ||
      recon.rows() != mask.rows || recon.cols() != mask.cols) {
    throw shape_error("aligned_object_error: shapes differ");
  }
  if (mask.count() == 0) {
    throw parameter_error("aligned_object_error: empty mask");
  }

  cdouble acc(0.0, 0.0);
  for (std::size_t i = 0; i < recon.size(); ++i) {
    if (mask.data[i]) acc += std::conj(recon[i]) * truth[i];
  }
  double phi = std::arg(acc);  // arg(0) = 0: no alignment possible, use identity
  cdouble rot = std::polar(1.0, phi);

  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < recon.size(); ++i) {
    if (!mask.data[i]) continue;
    num += std::norm(rot * recon[i] - truth[i]);
    den += std::norm(truth[i]);
  }
  if (den == 0.0) {
    throw parameter_error("aligned_object_error: truth is zero on the mask");
  }
  return AlignedError{std::sqrt(num / den), phi};
}

Mask coverage_mask(const ComplexField& probe, const ScanGeometry& geometry,
                   double threshold_fraction) {
  geometry.validate();
  if (probe.rows() != geometry.probe_rows ||
      probe.cols() != geometry.probe_cols) {
    throw shape_error("coverage_mask: probe shape differs from geometry");
  }
  if (!std::isfinite(threshold_fraction) || threshold_fraction <= 0.0 ||
      threshold_fraction >= 1.0) {
    throw parameter_error("coverage_mask: threshold must be in (0,1)");
  }

  RealGrid acc(geometry.object_rows, geometry.object_cols, 0.0);
  for (const Subdomain& pos : geometry.positions) {
    for (int r = 0; r < pos.height; ++r) {
      for (int c = 0; c < pos.width; ++c) {
        acc(pos.row_offset + r, pos.col_offset + c) += std::norm(probe(r, c));
      }
    }
  }
  double peak = 0.0;
  for (double v : acc.data) peak = std::max(peak, v);

  Mask mask(geometry.object_rows, geometry.object_cols);
  double cut = threshold_fraction * peak;
  for (std::size_t i = 0; i < acc.data.size(); ++i) {
    mask.data[i] = acc.data[i] > cut ? 1 : 0;
  }
  return mask;
}

double probe_energy(const ComplexField& probe) {
  double e = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) e += std::norm(probe[i]);
  return e;
}

void normalize_probe_energy(ComplexField& object, ComplexField& probe,
                            double target_energy) {
  if (!std::isfinite(target_energy) || target_energy <= 0.0) {
    throw parameter_error("normalize_probe_energy: target must be positive");
  }
  double e = probe_energy(probe);
  if (e == 0.0) {
    throw degenerate_error("normalize_probe_energy: probe is identically zero");
  }
  double s = std::sqrt(target_energy / e);
  for (std::size_t i = 0; i < probe.size(); ++i) probe[i] *= s;
  for (std::size_t i = 0; i < object.size(); ++i) object[i] /= s;
}

}  // namespace ptycho
