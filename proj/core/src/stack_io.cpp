#include "ptycho/stack_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "ptycho/errors.hpp"

namespace ptycho {

namespace {

using nlohmann::json;

static_assert(sizeof(double) == 8, "float64 storage assumed");

std::uint64_t bswap64(std::uint64_t v) {
  v = (v >> 32) | (v << 32);
  v = ((v & 0xffff0000ffff0000ull) >> 16) | ((v & 0x0000ffff0000ffffull) << 16);
  return ((v & 0xff00ff00ff00ff00ull) >> 8) | ((v & 0x00ff00ff00ff00ffull) << 8);
}

// Payloads are little-endian on disk; byteswap on big-endian hosts.
void to_wire(std::vector<double>& values) {
  if constexpr (std::endian::native == std::endian::big) {
    for (double& v : values) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, 8);
      bits = bswap64(bits);
      std::memcpy(&v, &bits, 8);
    }
  }
}

std::vector<double> read_doubles(const std::filesystem::path& path,
                                 std::size_t expected_bytes,
                                 const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  auto actual = std::size_t(in.tellg());
  if (actual != expected_bytes) {
    throw truncated_file_error(std::string(what) + ": " + path.string() +
                               " holds " + std::to_string(actual) +
                               " bytes, expected " +
                               std::to_string(expected_bytes));
  }
  in.seekg(0, std::ios::beg);
  std::vector<double> values(expected_bytes / 8);
  in.read(reinterpret_cast<char*>(values.data()),
          std::streamsize(expected_bytes));
  if (!in.good()) throw io_error("read failed: " + path.string());
  to_wire(values);  // symmetric swap
  return values;
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw io_error(path.string() + ": " + e.what());
  }
  return j;
}

}  // namespace

void atomic_write_bytes(const std::filesystem::path& path, const void* data,
                        std::size_t size) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open " + tmp.string() + " for writing");
    out.write(static_cast<const char*>(data), std::streamsize(size));
    if (!out.good()) throw io_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void atomic_write_text(const std::filesystem::path& path,
                       const std::string& text) {
  atomic_write_bytes(path, text.data(), text.size());
}

std::string fnv1a_hex(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)h);
  return std::string(buf);
}

void save_stack(const DiffractionStack& stack,
                const std::filesystem::path& dir) {
  stack.validate();
  std::filesystem::create_directories(dir);

  json meta;
  meta["format_version"] = "1";
  meta["probe_rows"] = stack.geometry.probe_rows;
  meta["probe_cols"] = stack.geometry.probe_cols;
  meta["object_rows"] = stack.geometry.object_rows;
  meta["object_cols"] = stack.geometry.object_cols;
  meta["num_patterns"] = stack.geometry.num_positions();
  json positions = json::array();
  for (const Subdomain& p : stack.geometry.positions) {
    positions.push_back({p.row_offset, p.col_offset});
  }
  meta["positions"] = std::move(positions);
  if (stack.flux_per_position) {
    meta["flux_per_position"] = *stack.flux_per_position;
  } else {
    meta["flux_per_position"] = nullptr;
  }
  if (stack.noise_seed) {
    meta["noise_seed"] = *stack.noise_seed;
  } else {
    meta["noise_seed"] = nullptr;
  }
  atomic_write_text(dir / "meta.json", meta.dump(2) + "\n");

  std::vector<double> payload;
  payload.reserve(stack.patterns.size() *
                  std::size_t(stack.geometry.probe_rows) *
                  std::size_t(stack.geometry.probe_cols));
  for (const RealGrid& pat : stack.patterns) {
    payload.insert(payload.end(), pat.data.begin(), pat.data.end());
  }
  to_wire(payload);
  atomic_write_bytes(dir / "patterns.bin", payload.data(), payload.size() * 8);
}

DiffractionStack load_stack(const std::filesystem::path& dir) {
  json meta = load_json(dir / "meta.json");

  std::string version;
  try {
    version = meta.at("format_version").get<std::string>();
  } catch (const json::exception&) {
    throw inconsistent_stack_error("meta.json: missing format_version");
  }
  if (version != "1") {
    throw version_mismatch_error("meta.json: format_version '" + version +
                                 "' unsupported (reader expects '1')");
  }

  DiffractionStack stack;
  int num_patterns = 0;
  try {
    stack.geometry.probe_rows = meta.at("probe_rows").get<int>();
    stack.geometry.probe_cols = meta.at("probe_cols").get<int>();
    stack.geometry.object_rows = meta.at("object_rows").get<int>();
    stack.geometry.object_cols = meta.at("object_cols").get<int>();
    num_patterns = meta.at("num_patterns").get<int>();
    for (const json& p : meta.at("positions")) {
      stack.geometry.positions.push_back(
          Subdomain{p.at(0).get<int>(), p.at(1).get<int>(),
                    stack.geometry.probe_rows, stack.geometry.probe_cols});
    }
    if (!meta.at("flux_per_position").is_null()) {
      stack.flux_per_position = meta.at("flux_per_position").get<double>();
    }
    if (!meta.at("noise_seed").is_null()) {
      stack.noise_seed = meta.at("noise_seed").get<std::uint64_t>();
    }
  } catch (const json::exception& e) {
    throw inconsistent_stack_error("meta.json: " + std::string(e.what()));
  }

  if (int(stack.geometry.positions.size()) != num_patterns) {
    throw inconsistent_stack_error(
        "meta.json: " + std::to_string(stack.geometry.positions.size()) +
        " positions but num_patterns = " + std::to_string(num_patterns));
  }
  if (stack.geometry.probe_rows <= 0 || stack.geometry.probe_cols <= 0 ||
      num_patterns <= 0) {
    throw inconsistent_stack_error("meta.json: non-positive dimensions");
  }

  std::size_t frame =
      std::size_t(stack.geometry.probe_rows) * stack.geometry.probe_cols;
  std::size_t expected_bytes = frame * std::size_t(num_patterns) * 8;

  // Distinguish a wrong pattern count from a mid-pattern cut.
  {
    std::error_code ec;
    auto actual = std::filesystem::file_size(dir / "patterns.bin", ec);
    if (ec) throw io_error("cannot stat " + (dir / "patterns.bin").string());
    if (actual != expected_bytes && actual % (frame * 8) == 0) {
      throw inconsistent_stack_error(
          "patterns.bin stores " + std::to_string(actual / (frame * 8)) +
          " patterns, meta.json says " + std::to_string(num_patterns));
    }
  }

  std::vector<double> payload =
      read_doubles(dir / "patterns.bin", expected_bytes, "load_stack");
  stack.patterns.assign(std::size_t(num_patterns),
                        RealGrid(stack.geometry.probe_rows,
                                 stack.geometry.probe_cols));
  for (int n = 0; n < num_patterns; ++n) {
    std::copy(payload.begin() + std::ptrdiff_t(frame) * n,
              payload.begin() + std::ptrdiff_t(frame) * (n + 1),
              stack.patterns[std::size_t(n)].data.begin());
  }

  try {
    stack.validate();
  } catch (const error& e) {
    throw inconsistent_stack_error("loaded stack invalid: " +
                                   std::string(e.what()));
  }
  return stack;
}

void write_field_bin(const ComplexField& field,
                     const std::filesystem::path& path) {
  if (field.empty()) throw shape_error("write_field_bin: empty field");
  std::vector<double> payload;
  payload.reserve(field.size() * 2);
  for (std::size_t i = 0; i < field.size(); ++i) {
    payload.push_back(field[i].real());
    payload.push_back(field[i].imag());
  }
  to_wire(payload);
  atomic_write_bytes(path, payload.data(), payload.size() * 8);
}

ComplexField read_field_bin(const std::filesystem::path& path, int rows,
                            int cols) {
  if (rows <= 0 || cols <= 0) {
    throw shape_error("read_field_bin: dimensions must be positive");
  }
  std::size_t expected = std::size_t(rows) * cols * 2 * 8;
  std::vector<double> payload = read_doubles(path, expected, "read_field_bin");
  ComplexField field(rows, cols);
  for (std::size_t i = 0; i < field.size(); ++i) {
    field[i] = cdouble(payload[2 * i], payload[2 * i + 1]);
  }
  return field;
}

}  // namespace ptycho
