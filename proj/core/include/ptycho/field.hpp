#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace ptycho {

using cdouble = std::complex<double>;

// Dense row-major complex grid. The workhorse type for objects, probes,
// exit waves and their Fourier transforms.
class ComplexField {
 public:
  ComplexField() = default;
  ComplexField(int rows, int cols, cdouble fill = cdouble(0.0, 0.0));

  static ComplexField ones(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  cdouble& operator()(int r, int c) { return data_[std::size_t(r) * cols_ + c]; }
  const cdouble& operator()(int r, int c) const {
    return data_[std::size_t(r) * cols_ + c];
  }
  cdouble& operator[](std::size_t i) { return data_[i]; }
  const cdouble& operator[](std::size_t i) const { return data_[i]; }

  cdouble* data() { return data_.data(); }
  const cdouble* data() const { return data_.data(); }

  bool operator==(const ComplexField& other) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<cdouble> data_;
};

// Dense row-major real grid: diffraction patterns, sqrt-intensities,
// amplitude/phase source images.
struct RealGrid {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  RealGrid() = default;
  RealGrid(int r, int c, double fill = 0.0);

  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }
  double& operator()(int r, int c) { return data[std::size_t(r) * cols + c]; }
  const double& operator()(int r, int c) const {
    return data[std::size_t(r) * cols + c];
  }

  bool operator==(const RealGrid& other) const = default;
};

// Boolean grid, e.g. the scan coverage mask.
struct Mask {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> data;

  Mask() = default;
  Mask(int r, int c, bool fill = false);

  bool operator()(int r, int c) const {
    return data[std::size_t(r) * cols + c] != 0;
  }
  void set(int r, int c, bool v) { data[std::size_t(r) * cols + c] = v ? 1 : 0; }
  std::size_t count() const;
};

// Axis-aligned rectangular view into a larger grid.
struct Subdomain {
  int row_offset = 0;
  int col_offset = 0;
  int height = 0;
  int width = 0;

  bool operator==(const Subdomain& other) const = default;
};

// Throws bounds_error unless `region` lies fully inside rows x cols.
void require_within(const Subdomain& region, int rows, int cols);

// Copy of the region as a standalone field. Throws bounds_error when the
// region pokes outside the object.
ComplexField extract(const ComplexField& object, const Subdomain& region);

// In-place variant; `patch` must already have the region's dimensions.
void extract_into(ComplexField& patch, const ComplexField& object,
                  const Subdomain& region);

// New object equal to `object` with the region replaced by `patch`.
// Pixels outside the region are copied bit-identically.
ComplexField writeback(const ComplexField& object, const Subdomain& region,
                       const ComplexField& patch);

// In-place variant of writeback.
void write_into(ComplexField& object, const Subdomain& region,
                const ComplexField& patch);

// z/|z| with phase_factor(0) = 1.
cdouble phase_factor(cdouble z);
ComplexField phase_factor(const ComplexField& f);

// max over entries of |z|^2. Throws shape_error on an empty field.
double max_sq_norm(const ComplexField& f);

// Elementwise product a*b. Shapes must agree.
ComplexField multiply(const ComplexField& a, const ComplexField& b);

bool all_finite(const ComplexField& f);

}  // namespace ptycho
