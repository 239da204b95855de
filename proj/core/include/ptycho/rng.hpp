#pragma once

#include <cstdint>
#include <random>

namespace ptycho {

// Deterministic seed derivation (splitmix64 finalizer over both words).
// mix_seed(s, k) gives independent-looking streams for k = 0, 1, 2, ...
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

// Seeded generator with portable output: mt19937_64's raw sequence is fixed
// by the standard, and every distribution below is implemented here rather
// than delegated to the (implementation-defined) std:: distributions, so a
// seed produces identical draws on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01();

  // Uniform in [a, b).
  double uniform(double a, double b);

  // Uniform integer in [0, n), rejection sampled (exact, no modulo bias).
  std::uint64_t uniform_below(std::uint64_t n);

  // Poisson draw. Inversion for small lambda, Hormann's PTRS transformed
  // rejection for lambda >= 10 (stable up to lambda ~ 1e18).
  std::int64_t poisson(double lambda);

 private:
  std::mt19937_64 engine_;
};

}  // namespace ptycho
