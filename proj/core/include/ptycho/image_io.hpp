#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ptycho/field.hpp"

namespace ptycho {

struct GrayImage {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> pixels;
};

// 8-bit grayscale PNG; writes are atomic. Color inputs are collapsed to gray
// on read.
void write_gray_png(const GrayImage& image, const std::filesystem::path& path);
GrayImage read_gray_png(const std::filesystem::path& path);

// PNG as a [0,1] grid (pixel / 255), for amp/phase source images.
RealGrid read_unit_image(const std::filesystem::path& path);

// Renders a field to quicklook PNGs plus the raw payload:
//   <prefix>_amp.png    |f| mapped min->0, max->255 (flat field -> all 0)
//   <prefix>_phase.png  arg(f), [-pi, pi] -> [0, 255]
//   <prefix>_field.bin  full-precision payload (write_field_bin)
void export_field_images(const ComplexField& field,
                         const std::filesystem::path& prefix);

GrayImage render_amplitude(const ComplexField& field);
GrayImage render_phase(const ComplexField& field);

}  // namespace ptycho
