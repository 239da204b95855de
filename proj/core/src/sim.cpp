#include "ptycho/sim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <numeric>
#include <string>

#include "ptycho/errors.hpp"
#include "ptycho/fft.hpp"
#include "ptycho/parallel.hpp"
#include "ptycho/rng.hpp"

namespace ptycho {

void ScanGeometry::validate() const {
  if (probe_rows <= 0 || probe_cols <= 0) {
    throw shape_error("geometry: probe dimensions must be positive");
  }
  if (object_rows <= 0 || object_cols <= 0) {
    throw shape_error("geometry: object dimensions must be positive");
  }
  if (positions.empty()) throw shape_error("geometry: no scan positions");
  for (const Subdomain& p : positions) {
    if (p.height != probe_rows || p.width != probe_cols) {
      throw shape_error("geometry: position extent differs from probe shape");
    }
    require_within(p, object_rows, object_cols);
  }
}

void DiffractionStack::validate() const {
  geometry.validate();
  if (patterns.size() != geometry.positions.size()) {
    throw shape_error("stack: " + std::to_string(patterns.size()) +
                      " patterns for " +
                      std::to_string(geometry.positions.size()) + " positions");
  }
  for (const RealGrid& p : patterns) {
    if (p.rows != geometry.probe_rows || p.cols != geometry.probe_cols) {
      throw shape_error("stack: pattern shape differs from probe shape");
    }
    for (double v : p.data) {
      if (!std::isfinite(v) || v < 0.0) {
        throw parameter_error("stack: intensities must be finite and >= 0");
      }
    }
  }
}

ComplexField make_test_object(const RealGrid& amp, const RealGrid& phase,
                              double phase_scale) {
  if (amp.rows != phase.rows || amp.cols != phase.cols) {
    throw shape_error("make_test_object: amp/phase image shapes differ");
  }
  if (amp.empty()) throw shape_error("make_test_object: empty images");
  if (!std::isfinite(phase_scale) || phase_scale < 0.0) {
    throw parameter_error("make_test_object: phase_scale must be >= 0");
  }
  ComplexField obj(amp.rows, amp.cols);
  for (std::size_t i = 0; i < obj.size(); ++i) {
    double a = amp.data[i];
    double p = phase.data[i];
    if (!(a >= 0.0 && a <= 1.0) || !(p >= 0.0 && p <= 1.0)) {
      throw parameter_error("make_test_object: image values must be in [0,1]");
    }
    obj[i] = std::polar(a, std::numbers::pi * phase_scale * p);
  }
  return obj;
}

ComplexField make_circular_probe(int size, double radius) {
  if (size <= 0) throw parameter_error("make_circular_probe: size must be positive");
  if (!std::isfinite(radius) || radius <= 0.0) {
    throw parameter_error("make_circular_probe: radius must be positive");
  }
  ComplexField probe(size, size);
  const int cr = size / 2;
  const int cc = size / 2;
  const double r2 = radius * radius;
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      double d2 = double(r - cr) * (r - cr) + double(c - cc) * (c - cc);
      probe(r, c) = d2 < r2 ? cdouble(1.0, 0.0) : cdouble(0.0, 0.0);
    }
  }
  return probe;
}

ScanGeometry raster_geometry(int object_rows, int object_cols, int probe_size,
                             int step) {
  if (probe_size <= 0) throw parameter_error("raster_geometry: probe_size must be positive");
  if (step <= 0) throw parameter_error("raster_geometry: step must be positive");
  if (probe_size > object_rows || probe_size > object_cols) {
    throw parameter_error("raster_geometry: probe larger than object");
  }
  ScanGeometry g;
  g.probe_rows = probe_size;
  g.probe_cols = probe_size;
  g.object_rows = object_rows;
  g.object_cols = object_cols;
  for (int r = 0; r + probe_size <= object_rows; r += step) {
    for (int c = 0; c + probe_size <= object_cols; c += step) {
      g.positions.push_back(Subdomain{r, c, probe_size, probe_size});
    }
  }
  return g;
}

double overlap_fraction(double radius, double step) {
  if (!std::isfinite(radius) || radius <= 0.0) {
    throw parameter_error("overlap_fraction: radius must be positive");
  }
  if (!std::isfinite(step) || step < 0.0) {
    throw parameter_error("overlap_fraction: step must be >= 0");
  }
  if (step >= 2.0 * radius) return 0.0;
  if (step == 0.0) return 1.0;
  double area = 2.0 * radius * radius * std::acos(step / (2.0 * radius)) -
                0.5 * step * std::sqrt(4.0 * radius * radius - step * step);
  return area / (std::numbers::pi * radius * radius);
}

DiffractionStack forward_diffract(const ComplexField& object,
                                  const ComplexField& probe,
                                  const ScanGeometry& geometry) {
  geometry.validate();
  if (probe.rows() != geometry.probe_rows || probe.cols() != geometry.probe_cols) {
    throw shape_error("forward_diffract: probe shape differs from geometry");
  }
  if (object.rows() != geometry.object_rows ||
      object.cols() != geometry.object_cols) {
    throw shape_error("forward_diffract: object shape differs from geometry");
  }
  DiffractionStack stack;
  stack.geometry = geometry;
  stack.patterns.assign(geometry.positions.size(),
                        RealGrid(geometry.probe_rows, geometry.probe_cols));
  parallel_for(geometry.num_positions(), [&](int n) {
    ComplexField z =
        fft2(multiply(probe, extract(object, geometry.positions[n])));
    RealGrid& pat = stack.patterns[std::size_t(n)];
    for (std::size_t i = 0; i < z.size(); ++i) pat.data[i] = std::norm(z[i]);
  });
  return stack;
}

namespace {

// Shared Poisson machinery; `scale_for` maps pattern index to the count
// scale (expected photons per unit stored intensity), 0 to skip a pattern.
DiffractionStack poissonize(const DiffractionStack& stack,
                            double flux_per_position, std::uint64_t seed,
                            const std::function<double(int)>& scale_for) {
  DiffractionStack out;
  out.geometry = stack.geometry;
  out.patterns.assign(stack.patterns.size(),
                      RealGrid(stack.geometry.probe_rows, stack.geometry.probe_cols));
  out.flux_per_position = flux_per_position;
  out.noise_seed = seed;
  parallel_for(int(stack.patterns.size()), [&](int n) {
    const RealGrid& src = stack.patterns[std::size_t(n)];
    RealGrid& dst = out.patterns[std::size_t(n)];
    double scale = scale_for(n);
    if (scale == 0.0) {
      dst = src;
      std::cerr << "warning: pattern " << n
                << " has zero total intensity, noise skipped\n";
      return;
    }
    Rng rng(mix_seed(seed, std::uint64_t(n)));
    for (std::size_t i = 0; i < src.data.size(); ++i) {
      dst.data[i] = double(rng.poisson(src.data[i] * scale)) / scale;
    }
  });
  return out;
}

}  // namespace

DiffractionStack add_poisson_noise(const DiffractionStack& stack,
                                   double flux_per_position,
                                   std::uint64_t seed) {
  stack.validate();
  if (!std::isfinite(flux_per_position) || flux_per_position <= 0.0) {
    throw parameter_error("add_poisson_noise: flux must be positive");
  }
  std::vector<double> totals(stack.patterns.size());
  for (std::size_t n = 0; n < stack.patterns.size(); ++n) {
    const auto& d = stack.patterns[n].data;
    totals[n] = std::accumulate(d.begin(), d.end(), 0.0);
  }
  return poissonize(stack, flux_per_position, seed, [&](int n) {
    double t = totals[std::size_t(n)];
    return t == 0.0 ? 0.0 : flux_per_position / t;
  });
}

DiffractionStack add_poisson_noise_dose(const DiffractionStack& stack,
                                        double flux_per_position,
                                        double reference_energy,
                                        std::uint64_t seed) {
  stack.validate();
  if (!std::isfinite(flux_per_position) || flux_per_position <= 0.0) {
    throw parameter_error("add_poisson_noise_dose: flux must be positive");
  }
  if (!std::isfinite(reference_energy) || reference_energy <= 0.0) {
    throw parameter_error(
        "add_poisson_noise_dose: reference energy must be positive");
  }
  double scale = flux_per_position / reference_energy;
  return poissonize(stack, flux_per_position, seed,
                    [scale](int) { return scale; });
}

DiffractionStack sample_subset(const DiffractionStack& stack,
                               double keep_fraction, std::uint64_t seed) {
  stack.validate();
  if (!std::isfinite(keep_fraction) || keep_fraction <= 0.0 ||
      keep_fraction > 1.0) {
    throw parameter_error("sample_subset: keep_fraction must be in (0,1]");
  }
  const int n = stack.geometry.num_positions();
  const auto m = std::llround(keep_fraction * double(n));
  if (m < 1) {
    throw parameter_error("sample_subset: subset would be empty");
  }

  // Partial Fisher-Yates picks m distinct indices; sorting restores scan order.
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (int i = 0; i < int(m); ++i) {
    int j = i + int(rng.uniform_below(std::uint64_t(n - i)));
    std::swap(idx[std::size_t(i)], idx[std::size_t(j)]);
  }
  idx.resize(std::size_t(m));
  std::sort(idx.begin(), idx.end());

  DiffractionStack out;
  out.geometry = stack.geometry;
  out.geometry.positions.clear();
  out.flux_per_position = stack.flux_per_position;
  out.noise_seed = stack.noise_seed;
  for (int i : idx) {
    out.geometry.positions.push_back(stack.geometry.positions[std::size_t(i)]);
    out.patterns.push_back(stack.patterns[std::size_t(i)]);
  }
  return out;
}

namespace {

// Anisotropic Gaussian bump, coordinates normalized to a 128-wide frame so
// other image sizes keep the same layout.
double bump(double r, double c, double r0, double c0, double sr, double sc) {
  double dr = (r - r0) / sr;
  double dc = (c - c0) / sc;
  return std::exp(-(dr * dr + dc * dc));
}

}  // namespace

RealGrid blobs_amplitude(int rows, int cols) {
  RealGrid img(rows, cols);
  for (int r = 0; r < rows; ++r) {
    double ry = rows > 1 ? 127.0 * double(r) / double(rows - 1) : 0.0;
    for (int c = 0; c < cols; ++c) {
      double cx = cols > 1 ? 127.0 * double(c) / double(cols - 1) : 0.0;
      double v = 0.82 + 0.12 * cx / 127.0;
      v -= 0.70 * bump(ry, cx, 75, 48, 34, 17);
      v -= 0.55 * bump(ry, cx, 32, 50, 13, 10);
      v -= 0.45 * bump(ry, cx, 88, 94, 24, 18);
      v -= 0.35 * bump(ry, cx, 112, 30, 18, 22);
      v -= 0.25 * bump(ry, cx, 20, 100, 14, 16);
      v -= 0.20 * bump(ry, cx, 60, 10, 16, 12);
      img(r, c) = std::clamp(0.73 * v, 0.0, 1.0);
    }
  }
  return img;
}

RealGrid blobs_phase(int rows, int cols) {
  struct Spot {
    double r, c, rad, h;
  };
  static const Spot spots[] = {{40, 80, 22, 0.30},
                               {90, 30, 26, -0.22},
                               {25, 25, 15, 0.25},
                               {100, 100, 20, 0.26},
                               {64, 64, 34, -0.15}};
  RealGrid img(rows, cols);
  for (int r = 0; r < rows; ++r) {
    double ry = rows > 1 ? 127.0 * double(r) / double(rows - 1) : 0.0;
    for (int c = 0; c < cols; ++c) {
      double cx = cols > 1 ? 127.0 * double(c) / double(cols - 1) : 0.0;
      double v = 0.28 + 0.22 * ry / 127.0;
      for (const Spot& s : spots) {
        double d2 = (ry - s.r) * (ry - s.r) + (cx - s.c) * (cx - s.c);
        v += s.h * std::exp(-d2 / (2.0 * s.rad * s.rad));
      }
      img(r, c) = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

SimScene make_scene(const RealGrid& amp_image, const RealGrid& phase_image,
                    double phase_scale, int probe_size, double probe_radius,
                    int step) {
  ComplexField image = make_test_object(amp_image, phase_image, phase_scale);
  if (step <= 0) throw parameter_error("make_scene: step must be positive");
  if (probe_size <= 0) throw parameter_error("make_scene: probe_size must be positive");

  // Enough raster frames per axis to span the image; the object is padded so
  // every frame fits, with the source image centered in the padding.
  auto frames = [&](int extent) { return (extent + step - 1) / step; };
  int nr = frames(image.rows());
  int nc = frames(image.cols());
  int ext_r = (nr - 1) * step + probe_size;
  int ext_c = (nc - 1) * step + probe_size;
  if (ext_r < image.rows() || ext_c < image.cols()) {
    throw parameter_error("make_scene: probe/step too small to cover image");
  }

  SimScene scene;
  scene.object = ComplexField(ext_r, ext_c, cdouble(1.0, 0.0));
  scene.image_region = Subdomain{(ext_r - image.rows()) / 2,
                                 (ext_c - image.cols()) / 2, image.rows(),
                                 image.cols()};
  write_into(scene.object, scene.image_region, image);
  scene.probe = make_circular_probe(probe_size, probe_radius);
  scene.geometry = raster_geometry(ext_r, ext_c, probe_size, step);
  return scene;
}

}  // namespace ptycho
