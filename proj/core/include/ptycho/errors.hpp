#pragma once

#include <stdexcept>
#include <string>

namespace ptycho {

class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Grid dimensions disagree (operand shapes, geometry vs field, ...).
class shape_error : public error {
 public:
  using error::error;
};

// A subdomain reaches outside its parent grid.
class bounds_error : public error {
 public:
  using error::error;
};

// A scalar argument is outside its documented range.
class parameter_error : public error {
 public:
  using error::error;
};

// An update denominator vanished identically (zero probe / zero object patch).
class degenerate_error : public error {
 public:
  using error::error;
};

// Object or probe went non-finite during reconstruction.
class divergence_error : public error {
 public:
  divergence_error(int epoch, const std::string& what)
      : error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

class io_error : public error {
 public:
  using error::error;
};

// On-disk format_version is not one we read.
class version_mismatch_error : public io_error {
 public:
  using io_error::io_error;
};

// A binary payload is shorter/longer than its metadata promises.
class truncated_file_error : public io_error {
 public:
  using io_error::io_error;
};

// Metadata is internally inconsistent (pattern count, dims, positions).
class inconsistent_stack_error : public io_error {
 public:
  using io_error::io_error;
};

// Config file failed validation; message names the offending field path.
class config_error : public error {
 public:
  using error::error;
};

}  // namespace ptycho
