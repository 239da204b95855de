#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "ptycho/sim.hpp"

namespace ptycho {

// On-disk stack layout (format_version "1"): a directory holding
//   meta.json     geometry, pattern count, flux, seeds
//   patterns.bin  little-endian float64, pattern-major, row-major
// Writes are atomic (temp file + rename).
void save_stack(const DiffractionStack& stack, const std::filesystem::path& dir);

// Loads and fully validates a stack directory. Throws
// version_mismatch_error / truncated_file_error / inconsistent_stack_error
// for the respective defects.
DiffractionStack load_stack(const std::filesystem::path& dir);

// Headerless complex field payload: little-endian float64 re,im interleaved,
// row-major. The reader is told the expected dimensions.
void write_field_bin(const ComplexField& field, const std::filesystem::path& path);
ComplexField read_field_bin(const std::filesystem::path& path, int rows, int cols);

// Writes bytes to path atomically (temp sibling + rename).
void atomic_write_bytes(const std::filesystem::path& path, const void* data,
                        std::size_t size);
void atomic_write_text(const std::filesystem::path& path, const std::string& text);

// FNV-1a 64-bit over raw bytes, as a 16-digit lowercase hex string.
std::string fnv1a_hex(const void* data, std::size_t size);

}  // namespace ptycho
