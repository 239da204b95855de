#include "ptycho/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <unordered_map>

#include "ptycho/errors.hpp"

namespace ptycho {

namespace {

// FFTW planning is not thread-safe; new-array execution is. Plans are built
// once per (rows, cols, direction) on throwaway buffers with FFTW_UNALIGNED
// so they can later run on any caller array.
struct PlanKey {
  int rows;
  int cols;
  int sign;
  bool operator==(const PlanKey&) const = default;
};

struct PlanKeyHash {
  std::size_t operator()(const PlanKey& k) const {
    std::size_t h = std::size_t(k.rows) * 1000003u + std::size_t(k.cols);
    return h * 2u + (k.sign == FFTW_FORWARD ? 0u : 1u);
  }
};

struct PlanCache {
  std::mutex mutex;
  std::unordered_map<PlanKey, fftw_plan, PlanKeyHash> plans;

  ~PlanCache() {
    for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
  }

  fftw_plan get(int rows, int cols, int sign) {
    std::lock_guard<std::mutex> lock(mutex);
    PlanKey key{rows, cols, sign};
    auto it = plans.find(key);
    if (it != plans.end()) return it->second;

    std::size_t n = std::size_t(rows) * cols;
    fftw_complex* in = fftw_alloc_complex(n);
    fftw_complex* out = fftw_alloc_complex(n);
    // Measured plans pay off for the transform sizes reconstruction hammers;
    // small grids (property tests sweep many sizes) stay on estimated plans.
    unsigned flags = (n >= 4096 ? FFTW_MEASURE : FFTW_ESTIMATE) | FFTW_UNALIGNED;
    fftw_plan plan = fftw_plan_dft_2d(rows, cols, in, out, sign, flags);
    fftw_free(in);
    fftw_free(out);
    if (!plan) throw error("fftw planning failed");
    plans.emplace(key, plan);
    return plan;
  }
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

ComplexField transform(const ComplexField& f, int sign) {
  if (f.empty()) throw shape_error("fft2: empty field");
  fftw_plan plan = cache().get(f.rows(), f.cols(), sign);

  ComplexField out(f.rows(), f.cols());
  // Out-of-place c2c execution leaves the input untouched.
  auto* in_ptr = reinterpret_cast<fftw_complex*>(
      const_cast<cdouble*>(f.data()));
  auto* out_ptr = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(plan, in_ptr, out_ptr);

  double scale = 1.0 / std::sqrt(double(f.size()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= scale;
  return out;
}

}  // namespace

ComplexField fft2(const ComplexField& f) { return transform(f, FFTW_FORWARD); }

ComplexField ifft2(const ComplexField& f) { return transform(f, FFTW_BACKWARD); }

}  // namespace ptycho
