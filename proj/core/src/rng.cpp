#include "ptycho/rng.hpp"

#include <cmath>
#include <limits>

#include "ptycho/errors.hpp"

namespace ptycho {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t state = a;
  std::uint64_t h = splitmix64(state);
  state ^= b + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
  return splitmix64(state);
}

double Rng::uniform01() {
  return double(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double a, double b) {
  return a + (b - a) * uniform01();
}

std::uint64_t Rng::uniform_below(std::uint64_t n) {
  if (n == 0) throw parameter_error("uniform_below: n must be positive");
  // Reject draws past the largest multiple of n below 2^64.
  std::uint64_t rem = (std::numeric_limits<std::uint64_t>::max() % n + 1) % n;
  std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - rem;
  for (;;) {
    std::uint64_t u = next_u64();
    if (u <= limit) return u % n;
  }
}

std::int64_t Rng::poisson(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw parameter_error("poisson: lambda must be finite and non-negative");
  }
  if (lambda == 0.0) return 0;

  if (lambda < 10.0) {
    // Knuth-style inversion by sequential search on the CDF.
    double p = std::exp(-lambda);
    double cdf = p;
    double u = uniform01();
    std::int64_t k = 0;
    while (u > cdf) {
      ++k;
      p *= lambda / double(k);
      cdf += p;
      if (k > 2000) break;  // u ~ 1 underflow guard; cannot trigger in practice
    }
    return k;
  }

  // PTRS (Hormann 1993): transformed rejection with squeeze.
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    double u = uniform01() - 0.5;
    double v = uniform01();
    double us = 0.5 - std::abs(u);
    double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= v_r) return std::int64_t(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        kf * loglam - lambda - std::lgamma(kf + 1.0)) {
      return std::int64_t(kf);
    }
  }
}

}  // namespace ptycho
