#include "ptycho/field.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ptycho/errors.hpp"

namespace ptycho {

namespace {

void require_valid_dims(int rows, int cols, const char* what) {
  if (rows <= 0 || cols <= 0) {
    throw shape_error(std::string(what) + ": dimensions must be positive, got " +
                      std::to_string(rows) + "x" + std::to_string(cols));
  }
}

}  // namespace

ComplexField::ComplexField(int rows, int cols, cdouble fill)
    : rows_(rows), cols_(cols) {
  require_valid_dims(rows, cols, "ComplexField");
  data_.assign(std::size_t(rows) * cols, fill);
}

ComplexField ComplexField::ones(int rows, int cols) {
  return ComplexField(rows, cols, cdouble(1.0, 0.0));
}

RealGrid::RealGrid(int r, int c, double fill) : rows(r), cols(c) {
  require_valid_dims(r, c, "RealGrid");
  data.assign(std::size_t(r) * c, fill);
}

Mask::Mask(int r, int c, bool fill) : rows(r), cols(c) {
  require_valid_dims(r, c, "Mask");
  data.assign(std::size_t(r) * c, fill ? 1 : 0);
}

std::size_t Mask::count() const {
  return std::size_t(std::count(data.begin(), data.end(), std::uint8_t(1)));
}

void require_within(const Subdomain& region, int rows, int cols) {
  if (region.height <= 0 || region.width <= 0) {
    throw bounds_error("subdomain has non-positive extent " +
                       std::to_string(region.height) + "x" +
                       std::to_string(region.width));
  }
  if (region.row_offset < 0 || region.col_offset < 0 ||
      region.row_offset + region.height > rows ||
      region.col_offset + region.width > cols) {
    throw bounds_error(
        "subdomain [" + std::to_string(region.row_offset) + "," +
        std::to_string(region.col_offset) + "]+" +
        std::to_string(region.height) + "x" + std::to_string(region.width) +
        " exceeds grid " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

ComplexField extract(const ComplexField& object, const Subdomain& region) {
  require_within(region, object.rows(), object.cols());
  ComplexField patch(region.height, region.width);
  extract_into(patch, object, region);
  return patch;
}

void extract_into(ComplexField& patch, const ComplexField& object,
                  const Subdomain& region) {
  require_within(region, object.rows(), object.cols());
  if (patch.rows() != region.height || patch.cols() != region.width) {
    throw shape_error("extract_into: patch shape does not match region");
  }
  for (int r = 0; r < region.height; ++r) {
    const cdouble* src = &object(region.row_offset + r, region.col_offset);
    std::copy(src, src + region.width, &patch(r, 0));
  }
}

ComplexField writeback(const ComplexField& object, const Subdomain& region,
                       const ComplexField& patch) {
  ComplexField out = object;
  write_into(out, region, patch);
  return out;
}

void write_into(ComplexField& object, const Subdomain& region,
                const ComplexField& patch) {
  require_within(region, object.rows(), object.cols());
  if (patch.rows() != region.height || patch.cols() != region.width) {
    throw shape_error("writeback: patch shape does not match region");
  }
  for (int r = 0; r < region.height; ++r) {
    const cdouble* src = &patch(r, 0);
    std::copy(src, src + region.width,
              &object(region.row_offset + r, region.col_offset));
  }
}

cdouble phase_factor(cdouble z) {
  double m = std::abs(z);
  if (m == 0.0) return cdouble(1.0, 0.0);
  return z / m;
}

ComplexField phase_factor(const ComplexField& f) {
  ComplexField out(f.rows(), f.cols());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = phase_factor(f[i]);
  return out;
}

double max_sq_norm(const ComplexField& f) {
  if (f.empty()) throw shape_error("max_sq_norm: empty field");
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double v = std::norm(f[i]);
    // nan must poison the max, not vanish in the comparison
    if (!(v <= m)) m = v;
  }
  return m;
}

ComplexField multiply(const ComplexField& a, const ComplexField& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw shape_error("multiply: operand shapes differ");
  }
  ComplexField out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

bool all_finite(const ComplexField& f) {
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!std::isfinite(f[i].real()) || !std::isfinite(f[i].imag())) return false;
  }
  return true;
}

}  // namespace ptycho
