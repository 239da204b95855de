#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "ptycho/errors.hpp"
#include "ptycho/fft.hpp"
#include "ptycho/field.hpp"
#include "ptycho/rng.hpp"

using namespace ptycho;

namespace {

ComplexField random_field(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  ComplexField f(rows, cols);
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  }
  return f;
}

// Textbook O(N^2) DFT with orthonormal scaling, written independently of the
// library's transform path.
ComplexField naive_dft2(const ComplexField& f, int sign) {
  const int R = f.rows(), C = f.cols();
  ComplexField out(R, C);
  const double two_pi = 2.0 * std::numbers::pi;
  for (int kr = 0; kr < R; ++kr) {
    for (int kc = 0; kc < C; ++kc) {
      cdouble acc = 0.0;
      for (int r = 0; r < R; ++r) {
        for (int c = 0; c < C; ++c) {
          double ang = sign * two_pi *
                       (double(kr) * r / R + double(kc) * c / C);
          acc += f(r, c) * std::polar(1.0, ang);
        }
      }
      out(kr, kc) = acc / std::sqrt(double(R) * C);
    }
  }
  return out;
}

double max_abs_diff(const ComplexField& a, const ComplexField& b) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

double energy(const ComplexField& f) {
  double e = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) e += std::norm(f[i]);
  return e;
}

}  // namespace

TEST_CASE("fft2 matches naive DFT on assorted sizes") {
  int sizes[][2] = {{1, 1}, {2, 3}, {4, 4}, {5, 7}, {8, 8}, {9, 5}, {16, 16}, {13, 13}};
  std::uint64_t seed = 100;
  for (auto [r, c] : sizes) {
    CAPTURE(r);
    CAPTURE(c);
    ComplexField f = random_field(r, c, seed++);
    CHECK(max_abs_diff(fft2(f), naive_dft2(f, -1)) < 1e-11);
    CHECK(max_abs_diff(ifft2(f), naive_dft2(f, +1)) < 1e-11);
  }
}

TEST_CASE("fft2/ifft2 roundtrip and Parseval up to 256^2") {
  for (int n : {16, 31, 64, 128, 256}) {
    CAPTURE(n);
    ComplexField f = random_field(n, n, std::uint64_t(n));
    ComplexField z = fft2(f);
    CHECK(std::abs(energy(z) - energy(f)) < 1e-9 * energy(f));
    CHECK(max_abs_diff(ifft2(z), f) < 1e-12);
    CHECK(max_abs_diff(fft2(ifft2(f)), f) < 1e-12);
  }
}

TEST_CASE("fft2 is linear and preserves the DC convention") {
  ComplexField a = random_field(12, 9, 5);
  ComplexField b = random_field(12, 9, 6);
  cdouble alpha{0.7, -1.3};
  ComplexField combo(12, 9);
  for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = a[i] + alpha * b[i];
  ComplexField za = fft2(a), zb = fft2(b), zc = fft2(combo);
  double m = 0.0;
  for (std::size_t i = 0; i < zc.size(); ++i) {
    m = std::max(m, std::abs(zc[i] - (za[i] + alpha * zb[i])));
  }
  CHECK(m < 1e-12);

  // Constant field -> single DC coefficient sqrt(N) * value.
  ComplexField ones = ComplexField::ones(6, 10);
  ComplexField z = fft2(ones);
  CHECK(std::abs(z(0, 0) - std::sqrt(60.0)) < 1e-12);
  double off = 0.0;
  for (std::size_t i = 1; i < z.size(); ++i) off = std::max(off, std::abs(z[i]));
  CHECK(off < 1e-12);
}

TEST_CASE("fft2 rejects empty fields") {
  ComplexField empty;
  CHECK_THROWS_AS(fft2(empty), shape_error);
}

TEST_CASE("extract/writeback are exact inverses on their window") {
  ComplexField obj = random_field(20, 17, 42);
  Subdomain win{3, 5, 8, 9};
  ComplexField patch = extract(obj, win);
  CHECK(patch.rows() == 8);
  CHECK(patch.cols() == 9);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 9; ++c) {
      CHECK(patch(r, c) == obj(r + 3, c + 5));
    }
  }

  ComplexField copy = obj;
  write_into(copy, win, patch);
  CHECK(copy == obj);

  ComplexField reuse(8, 9);
  extract_into(reuse, obj, win);
  CHECK(reuse == patch);
}

TEST_CASE("extract rejects out-of-bounds subdomains") {
  ComplexField obj = random_field(10, 10, 1);
  CHECK_THROWS_AS(extract(obj, Subdomain{5, 5, 6, 3}), bounds_error);
  CHECK_THROWS_AS(extract(obj, Subdomain{-1, 0, 3, 3}), bounds_error);
  CHECK_THROWS_AS(extract(obj, Subdomain{0, 8, 3, 3}), bounds_error);
}

TEST_CASE("phase_factor is unit magnitude with zero mapped to one") {
  CHECK(phase_factor(cdouble{0.0, 0.0}) == cdouble{1.0, 0.0});
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    cdouble z{rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)};
    if (z == cdouble{}) continue;
    cdouble u = phase_factor(z);
    CHECK(std::abs(std::abs(u) - 1.0) < 1e-14);
    CHECK(std::abs(u * std::abs(z) - z) < 1e-12);
  }
}

TEST_CASE("max_sq_norm and multiply") {
  ComplexField f(2, 2);
  f(0, 0) = {3.0, 4.0};   // |.|^2 = 25
  f(0, 1) = {1.0, 0.0};
  f(1, 0) = {0.0, -2.0};
  f(1, 1) = {0.0, 0.0};
  CHECK(max_sq_norm(f) == doctest::Approx(25.0).epsilon(1e-15));

  ComplexField g(2, 2);
  g(0, 0) = {1.0, 1.0};
  g(0, 1) = {2.0, 0.0};
  g(1, 0) = {0.0, 1.0};
  g(1, 1) = {5.0, 5.0};
  ComplexField h = multiply(f, g);
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      CHECK(h(r, c) == f(r, c) * g(r, c));
    }
  }

  ComplexField wrong(2, 3);
  CHECK_THROWS_AS(multiply(f, wrong), shape_error);
}

TEST_CASE("all_finite flags NaN and infinity") {
  ComplexField f = ComplexField::ones(3, 3);
  CHECK(all_finite(f));
  f(1, 1) = {std::numeric_limits<double>::quiet_NaN(), 0.0};
  CHECK_FALSE(all_finite(f));
  f(1, 1) = {0.0, std::numeric_limits<double>::infinity()};
  CHECK_FALSE(all_finite(f));
}

TEST_CASE("Rng uniform01 stays in [0,1) and mix_seed separates streams") {
  Rng a(1), b(1);
  for (int i = 0; i < 1000; ++i) {
    double u = a.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == b.uniform01());  // same seed, same stream
  }
  CHECK(mix_seed(1, 2) != mix_seed(2, 1));
  CHECK(mix_seed(0, 0) != 0);
}

TEST_CASE("Rng poisson matches moments at small and large means") {
  for (double lambda : {0.3, 2.0, 9.0, 40.0, 900.0}) {
    CAPTURE(lambda);
    Rng rng(std::uint64_t(lambda * 977) + 3);
    const int trials = 20000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < trials; ++i) {
      double k = double(rng.poisson(lambda));
      sum += k;
      sq += k * k;
    }
    double mean = sum / trials;
    double var = sq / trials - mean * mean;
    // Standard error of the mean is sqrt(lambda/trials); allow 5 sigma.
    double tol = 5.0 * std::sqrt(lambda / trials);
    CHECK(std::abs(mean - lambda) < tol);
    CHECK(std::abs(var - lambda) < 0.1 * lambda + 5.0 * lambda / std::sqrt(double(trials)));
  }
  Rng rng(5);
  CHECK(rng.poisson(0.0) == 0);
}

TEST_CASE("uniform_below covers the range without bias artifacts") {
  Rng rng(11);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    auto v = rng.uniform_below(7);
    REQUIRE(v < 7);
    ++counts[std::size_t(v)];
  }
  for (int c : counts) {
    CHECK(c > 9000);
    CHECK(c < 11000);
  }
}
