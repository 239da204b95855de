#include "ptycho/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ptycho/errors.hpp"
#include "ptycho/stack_io.hpp"

namespace ptycho {

void write_gray_png(const GrayImage& image, const std::filesystem::path& path) {
  if (image.rows <= 0 || image.cols <= 0 ||
      image.pixels.size() != std::size_t(image.rows) * image.cols) {
    throw shape_error("write_gray_png: bad image dimensions");
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";

  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = png_uint_32(image.cols);
  png.height = png_uint_32(image.rows);
  png.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png, tmp.string().c_str(), 0,
                               image.pixels.data(), 0, nullptr)) {
    std::string msg = png.message;
    png_image_free(&png);
    std::filesystem::remove(tmp);
    throw io_error("png write failed: " + path.string() + " (" + msg + ")");
  }
  std::filesystem::rename(tmp, path);
}

GrayImage read_gray_png(const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str())) {
    std::string msg = png.message;
    png_image_free(&png);
    throw io_error("png read failed: " + path.string() + " (" + msg + ")");
  }
  png.format = PNG_FORMAT_GRAY;
  GrayImage image;
  image.rows = int(png.height);
  image.cols = int(png.width);
  image.pixels.resize(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, image.pixels.data(), 0, nullptr)) {
    std::string msg = png.message;
    png_image_free(&png);
    throw io_error("png read failed: " + path.string() + " (" + msg + ")");
  }
  return image;
}

RealGrid read_unit_image(const std::filesystem::path& path) {
  GrayImage image = read_gray_png(path);
  RealGrid grid(image.rows, image.cols);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    grid.data[i] = double(image.pixels[i]) / 255.0;
  }
  return grid;
}

GrayImage render_amplitude(const ComplexField& field) {
  if (field.empty()) throw shape_error("render_amplitude: empty field");
  double lo = std::abs(field[0]);
  double hi = lo;
  for (std::size_t i = 1; i < field.size(); ++i) {
    double a = std::abs(field[i]);
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  GrayImage image{field.rows(), field.cols(),
                  std::vector<std::uint8_t>(field.size(), 0)};
  if (hi > lo) {
    double scale = 255.0 / (hi - lo);
    for (std::size_t i = 0; i < field.size(); ++i) {
      double v = (std::abs(field[i]) - lo) * scale;
      image.pixels[i] = std::uint8_t(std::lround(std::clamp(v, 0.0, 255.0)));
    }
  }
  return image;
}

GrayImage render_phase(const ComplexField& field) {
  if (field.empty()) throw shape_error("render_phase: empty field");
  GrayImage image{field.rows(), field.cols(),
                  std::vector<std::uint8_t>(field.size(), 0)};
  for (std::size_t i = 0; i < field.size(); ++i) {
    double v = (std::arg(field[i]) + std::numbers::pi) /
               (2.0 * std::numbers::pi) * 255.0;
    image.pixels[i] = std::uint8_t(std::lround(std::clamp(v, 0.0, 255.0)));
  }
  return image;
}

void export_field_images(const ComplexField& field,
                         const std::filesystem::path& prefix) {
  std::filesystem::path parent = prefix.parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::filesystem::path base = prefix;
  write_gray_png(render_amplitude(field),
                 std::filesystem::path(base.string() + "_amp.png"));
  write_gray_png(render_phase(field),
                 std::filesystem::path(base.string() + "_phase.png"));
  write_field_bin(field, std::filesystem::path(base.string() + "_field.bin"));
}

}  // namespace ptycho
